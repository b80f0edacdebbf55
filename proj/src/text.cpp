#include "hostility/text.hpp"

#include "hostility/error.hpp"
#include "hostility/io.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace hostility {

namespace {

// Decodes one UTF-8 codepoint starting at `pos`; invalid bytes decode as U+FFFD.
char32_t decode_utf8(std::string_view s, std::size_t& pos)
{
    const auto b0 = static_cast<unsigned char>(s[pos]);
    int len = 1;
    char32_t cp = 0xFFFD;
    if (b0 < 0x80) {
        cp = b0;
    } else if ((b0 & 0xE0) == 0xC0) {
        len = 2;
        cp = b0 & 0x1F;
    } else if ((b0 & 0xF0) == 0xE0) {
        len = 3;
        cp = b0 & 0x0F;
    } else if ((b0 & 0xF8) == 0xF0) {
        len = 4;
        cp = b0 & 0x07;
    } else {
        ++pos;
        return 0xFFFD;
    }
    if (pos + static_cast<std::size_t>(len) > s.size()) {
        pos = s.size();
        return 0xFFFD;
    }
    for (int i = 1; i < len; ++i) {
        const auto b = static_cast<unsigned char>(s[pos + static_cast<std::size_t>(i)]);
        if ((b & 0xC0) != 0x80) {
            pos += static_cast<std::size_t>(i);
            return 0xFFFD;
        }
        cp = (cp << 6) | (b & 0x3F);
    }
    pos += static_cast<std::size_t>(len);
    return cp;
}

void append_utf8(std::string& out, char32_t cp)
{
    if (cp < 0x80) {
        out.push_back(static_cast<char>(cp));
    } else if (cp < 0x800) {
        out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else if (cp < 0x10000) {
        out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else {
        out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    }
}

bool is_emoji(char32_t cp)
{
    return (cp >= 0x1F000 && cp <= 0x1FAFF) || // symbols, pictographs, emoticons, supplemental
           (cp >= 0x2600 && cp <= 0x27BF) ||   // misc symbols, dingbats
           (cp >= 0x2300 && cp <= 0x23FF) ||   // misc technical (watch, hourglass, ...)
           (cp >= 0x2B00 && cp <= 0x2BFF) ||   // arrows, stars
           cp == 0x00A9 || cp == 0x00AE || cp == 0x203C || cp == 0x2049 || cp == 0x2122 ||
           cp == 0x3030 || cp == 0x303D || cp == 0x3297 || cp == 0x3299;
}

bool is_joiner(char32_t cp)
{
    return cp == 0x200D || (cp >= 0xFE00 && cp <= 0xFE0F);
}

bool is_word_char(char32_t cp)
{
    if (cp < 0x80) {
        return (cp >= 'a' && cp <= 'z') || (cp >= 'A' && cp <= 'Z') || (cp >= '0' && cp <= '9') || cp == '_';
    }
    if (is_emoji(cp) || is_joiner(cp)) {
        return false;
    }
    // General punctuation, spaces, and replacement characters separate words.
    if ((cp >= 0x2000 && cp <= 0x206F) || cp == 0x00A0 || cp == 0x3000 || cp == 0xFFFD ||
        (cp >= 0x00A1 && cp <= 0x00BF) || cp == 0x00D7 || cp == 0x00F7) {
        return false;
    }
    return true;
}

char32_t to_lower(char32_t cp)
{
    if (cp >= 'A' && cp <= 'Z') {
        return cp + 32;
    }
    // Latin-1 uppercase letters (excluding the multiplication sign).
    if (cp >= 0xC0 && cp <= 0xDE && cp != 0xD7) {
        return cp + 32;
    }
    return cp;
}

} // namespace

TokenSeq tokenize(std::string_view text)
{
    TokenSeq tokens;
    std::string word;
    bool mention = false;
    auto flush = [&] {
        if (mention) {
            tokens.emplace_back(kMentionToken);
        } else if (!word.empty()) {
            tokens.push_back(word);
        }
        word.clear();
        mention = false;
    };

    std::size_t pos = 0;
    while (pos < text.size()) {
        const std::size_t start = pos;
        const char32_t cp = decode_utf8(text, pos);
        if (is_word_char(cp)) {
            if (!mention) {
                append_utf8(word, to_lower(cp));
            }
            continue;
        }
        flush();
        if (is_emoji(cp)) {
            tokens.emplace_back(text.substr(start, pos - start));
        } else if (cp == '@' && pos < text.size()) {
            std::size_t peek = pos;
            if (is_word_char(decode_utf8(text, peek))) {
                mention = true;
            }
        }
    }
    flush();
    return tokens;
}

bool contains_mention(const TokenSeq& tokens)
{
    return std::find(tokens.begin(), tokens.end(), kMentionToken) != tokens.end();
}

std::optional<Eigen::Index> Vocabulary::find(const std::string& token) const
{
    auto it = index_.find(token);
    if (it == index_.end()) {
        return std::nullopt;
    }
    return it->second;
}

void VocabularyCounter::add(const TokenSeq& tokens)
{
    for (const auto& t : tokens) {
        ++counts_[t];
    }
}

Vocabulary VocabularyCounter::finish(std::size_t min_count) const
{
    if (min_count < 1) {
        throw ConfigError("vocabulary min_count must be >= 1");
    }
    Vocabulary v;
    v.min_count_ = min_count;
    for (const auto& [token, count] : counts_) { // std::map iterates in sorted order
        if (count >= min_count) {
            v.index_.emplace(token, static_cast<Eigen::Index>(v.tokens_.size()));
            v.tokens_.push_back(token);
        }
    }
    return v;
}

Vocabulary build_vocab(std::span<const TokenSeq> sequences, std::size_t min_count)
{
    VocabularyCounter counter;
    for (const auto& s : sequences) {
        counter.add(s);
    }
    return counter.finish(min_count);
}

namespace {

std::unordered_set<std::string> read_word_list(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) {
        throw DataError("cannot open lexicon " + path.string());
    }
    std::unordered_set<std::string> words;
    std::string line;
    while (std::getline(in, line)) {
        auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos) {
            continue;
        }
        auto last = line.find_last_not_of(" \t\r");
        std::string w = line.substr(first, last - first + 1);
        std::transform(w.begin(), w.end(), w.begin(), [](unsigned char c) {
            return static_cast<char>(std::tolower(c));
        });
        words.insert(std::move(w));
    }
    return words;
}

std::string write_word_list(const std::unordered_set<std::string>& words)
{
    std::vector<std::string> sorted(words.begin(), words.end());
    std::sort(sorted.begin(), sorted.end());
    std::string out;
    for (const auto& w : sorted) {
        out += w;
        out += '\n';
    }
    return out;
}

} // namespace

Lexicons load_lexicons(const std::filesystem::path& dir)
{
    Lexicons lex;
    for (std::size_t c = 0; c < kHateCategories.size(); ++c) {
        lex.hate[c] = read_word_list(dir / (std::string(kHateCategories[c]) + ".txt"));
    }
    lex.profane = read_word_list(dir / "profane.txt");
    return lex;
}

void save_lexicons(const Lexicons& lexicons, const std::filesystem::path& dir)
{
    std::filesystem::create_directories(dir);
    for (std::size_t c = 0; c < kHateCategories.size(); ++c) {
        write_file_atomic(dir / (std::string(kHateCategories[c]) + ".txt"), write_word_list(lexicons.hate[c]));
    }
    write_file_atomic(dir / "profane.txt", write_word_list(lexicons.profane));
}

LexiconVector lexicon_features(const TokenSeq& tokens, const Lexicons& lexicons)
{
    LexiconVector f = LexiconVector::Zero();
    for (const auto& t : tokens) {
        for (std::size_t c = 0; c < lexicons.hate.size(); ++c) {
            if (lexicons.hate[c].contains(t)) {
                f(static_cast<Eigen::Index>(c)) = 1.0;
                f(6) += 1.0;
            }
        }
        if (lexicons.profane.contains(t)) {
            f(7) = 1.0;
            f(8) += 1.0;
        }
    }
    return f;
}

std::vector<std::string> lexicon_feature_names()
{
    std::vector<std::string> names;
    for (auto c : kHateCategories) {
        names.push_back("hate_" + std::string(c));
    }
    names.emplace_back("hate_count");
    names.emplace_back("profane");
    names.emplace_back("profane_count");
    return names;
}

} // namespace hostility
