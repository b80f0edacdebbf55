#include "hostility/synth.hpp"

#include "hostility/error.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <sstream>
#include <iomanip>

namespace hostility {

NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(
    SynthConfig, seed, n_posts, n_authors, n_users, span_days, hostile_base, vulnerability_sd, cluster_mix,
    volume_tilt, immediate_onset_hours, delayed_onset_hours, delayed_onset_sigma, low_volume, high_volume,
    followup_hours, quiet_comments, hostile_comments, comments_sigma, arrival_hours, arrival_sigma, innocuous_words,
    tension_words, hostile_roots, lexicon_words, profane_words, emoji, lexicon_rate, subtle_rate, noise_rate,
    mention_rate, hostile_mention_rate, emoji_rate, profane_rate, tension_base, tension_peak, tension_hours,
    tension_floor, tension_mention, friend_rate, hostile_friend_rate, lurker_rate, circle_size, hostile_user_share,
    escalation_base, escalation_slope)

void SynthConfig::validate() const
{
    auto fail = [](const std::string& what) { throw ConfigError("synth config: " + what); };
    if (n_posts == 0 || n_authors == 0 || n_users == 0) {
        fail("post, author and user counts must be positive");
    }
    double mix = 0.0;
    for (double m : cluster_mix) {
        if (!(m >= 0 && m <= 1)) {
            fail("cluster_mix entries must lie in [0,1]");
        }
        mix += m;
    }
    if (std::abs(mix - 1.0) > 1e-9) {
        fail("cluster_mix must sum to 1");
    }
    for (double p : {lexicon_rate, subtle_rate, noise_rate, mention_rate, hostile_mention_rate, emoji_rate,
                     profane_rate, tension_base, tension_peak, tension_floor, tension_mention, friend_rate,
                     hostile_friend_rate, lurker_rate, hostile_user_share, escalation_base}) {
        if (!(p >= 0 && p <= 1)) {
            fail("probabilities must lie in [0,1]");
        }
    }
    if (tension_base + tension_floor + tension_peak > 1) {
        fail("tension_base + tension_floor + tension_peak must not exceed 1");
    }
    for (double v : {span_days, immediate_onset_hours, delayed_onset_hours, followup_hours, quiet_comments,
                     hostile_comments, arrival_hours, tension_hours}) {
        if (!(v > 0)) {
            fail("durations and medians must be positive");
        }
    }
    if (!(low_volume >= 1) || !(high_volume >= 4)) {
        fail("low_volume must be >= 1 and high_volume >= 4");
    }
    if (innocuous_words < 10 || tension_words == 0 || hostile_roots == 0 || lexicon_words == 0 || profane_words == 0 ||
        emoji == 0 || circle_size == 0) {
        fail("vocabulary and circle sizes must be positive");
    }
    if (hostile_user_share * static_cast<double>(n_users) < 1) {
        fail("hostile_user_share leaves no hostile users");
    }
}

std::string synth_config_to_json(const SynthConfig& cfg)
{
    return nlohmann::json(cfg).dump(2) + "\n";
}

SynthConfig synth_config_from_json(const std::string& text)
{
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("synth config: ") + e.what());
    }
    if (!j.is_object()) {
        throw ConfigError("synth config must be a JSON object");
    }
    const nlohmann::json defaults = SynthConfig{};
    for (const auto& item : j.items()) {
        if (!defaults.contains(item.key())) {
            throw ConfigError("synth config: unknown key '" + item.key() + "'");
        }
    }
    SynthConfig cfg;
    try {
        cfg = j.get<SynthConfig>();
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("synth config: ") + e.what());
    }
    cfg.validate();
    return cfg;
}

namespace {

std::string utf8(char32_t cp)
{
    std::string out;
    if (cp < 0x80) {
        out += static_cast<char>(cp);
    } else if (cp < 0x800) {
        out += static_cast<char>(0xC0 | (cp >> 6));
        out += static_cast<char>(0x80 | (cp & 0x3F));
    } else if (cp < 0x10000) {
        out += static_cast<char>(0xE0 | (cp >> 12));
        out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
        out += static_cast<char>(0x80 | (cp & 0x3F));
    } else {
        out += static_cast<char>(0xF0 | (cp >> 18));
        out += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
        out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
        out += static_cast<char>(0x80 | (cp & 0x3F));
    }
    return out;
}

class WordFactory {
public:
    explicit WordFactory(std::mt19937_64& rng) : rng_(rng) {}

    std::string make(int min_syllables, int max_syllables)
    {
        static constexpr std::string_view onsets[] = {"b", "d", "f", "g", "k", "l", "m", "n", "p", "r",
                                                      "s", "t", "v", "z", "br", "kr", "st", "tr", "sh", "gl"};
        static constexpr std::string_view vowels[] = {"a", "e", "i", "o", "u", "ai", "ou", "ee"};
        static constexpr std::string_view codas[] = {"", "", "", "n", "r", "k", "s", "m"};
        std::uniform_int_distribution<int> syl(min_syllables, max_syllables);
        std::uniform_int_distribution<std::size_t> on(0, std::size(onsets) - 1);
        std::uniform_int_distribution<std::size_t> vo(0, std::size(vowels) - 1);
        std::uniform_int_distribution<std::size_t> co(0, std::size(codas) - 1);
        for (;;) {
            std::string w;
            const int n = syl(rng_);
            for (int i = 0; i < n; ++i) {
                w += onsets[on(rng_)];
                w += vowels[vo(rng_)];
                w += codas[co(rng_)];
            }
            if (w != "you" && used_.insert(w).second) {
                return w;
            }
        }
    }

    std::vector<std::string> batch(std::size_t n, int min_syllables, int max_syllables)
    {
        std::vector<std::string> out;
        for (std::size_t i = 0; i < n; ++i) {
            out.push_back(make(min_syllables, max_syllables));
        }
        return out;
    }

    void reserve(const std::string& w) { used_.insert(w); }

private:
    std::mt19937_64& rng_;
    std::set<std::string> used_;
};

// Spelling variants sharing most character n-grams with the root.
std::vector<std::string> variants(const std::string& root)
{
    std::vector<std::string> out = {root, root + root.back(), root + "z", root + "zz"};
    const auto vowel = root.find_first_of("aeiou");
    if (vowel != std::string::npos) {
        std::string doubled = root;
        doubled.insert(vowel, 1, root[vowel]);
        out.push_back(doubled);
    }
    return out;
}

struct Vocab {
    std::vector<std::string> innocuous;
    std::vector<std::string> tension;
    std::vector<std::vector<std::string>> hostile; ///< root first, then variants
    std::vector<std::string> lexicon;             ///< all hate-lexicon words
    std::vector<std::string> profane;
    std::vector<std::string> happy_emoji;
    std::vector<std::string> angry_emoji;
};

class Sampler {
public:
    Sampler(const SynthConfig& cfg, std::mt19937_64& rng, const Vocab& vocab, const std::vector<std::string>& users)
        : cfg_(cfg), rng_(rng), v_(vocab), users_(users)
    {
        std::vector<double> w;
        for (std::size_t i = 0; i < v_.innocuous.size(); ++i) {
            w.push_back(1.0 / std::pow(static_cast<double>(i + 1), 1.05));
        }
        zipf_ = std::discrete_distribution<std::size_t>(w.begin(), w.end());
    }

    bool coin(double p) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng_) < p; }

    template <typename T>
    const T& pick(const std::vector<T>& items)
    {
        return items[std::uniform_int_distribution<std::size_t>(0, items.size() - 1)(rng_)];
    }

    std::size_t length() { return 2 + std::geometric_distribution<std::size_t>(1.0 / 6.0)(rng_); }

    void innocuous_words(std::vector<std::string>& out, std::size_t n)
    {
        for (std::size_t i = 0; i < n; ++i) {
            out.push_back(v_.innocuous[zipf_(rng_)]);
        }
    }

    std::string hostile_word()
    {
        const auto& family = pick(v_.hostile);
        // Half the time the root, otherwise a variant.
        return coin(0.5) ? family.front() : pick(family);
    }

    std::string mention() { return "@" + pick(users_); }

    std::string join(std::vector<std::string> words)
    {
        std::shuffle(words.begin(), words.end(), rng_);
        std::string out;
        for (const auto& w : words) {
            if (!out.empty()) {
                out += ' ';
            }
            out += w;
        }
        return out;
    }

    std::string innocuous(double tension, double mention_rate)
    {
        std::vector<std::string> words;
        innocuous_words(words, length());
        if (coin(tension)) {
            words.push_back(pick(v_.tension));
            if (coin(0.5)) {
                words.push_back(pick(v_.tension));
            }
        }
        if (coin(cfg_.noise_rate)) {
            words.push_back(hostile_word());
        }
        if (coin(cfg_.profane_rate)) {
            words.push_back(pick(v_.profane));
        }
        if (coin(cfg_.emoji_rate)) {
            words.push_back(pick(v_.happy_emoji));
        }
        std::string text = join(std::move(words));
        if (coin(mention_rate)) {
            text = mention() + " " + text;
        }
        return text;
    }

    std::string hostile(bool escalate)
    {
        std::vector<std::string> words;
        innocuous_words(words, length() / 2 + 1);
        if (!coin(cfg_.subtle_rate)) {
            words.push_back(hostile_word());
            if (coin(0.6)) {
                words.push_back(hostile_word());
            }
        }
        if (coin(cfg_.lexicon_rate)) {
            words.push_back(pick(coin(0.5) ? v_.lexicon : v_.profane));
        }
        if (coin(0.3)) {
            words.push_back(pick(v_.angry_emoji));
        }
        if (escalate) {
            words.push_back("you");
            words.push_back(pick(v_.profane));
            words.push_back(hostile_word());
        } else if (coin(0.3)) {
            words.push_back("you");
        }
        std::string text = join(std::move(words));
        if (escalate || coin(cfg_.hostile_mention_rate)) {
            text = mention() + " " + text;
        }
        return text;
    }

private:
    const SynthConfig& cfg_;
    std::mt19937_64& rng_;
    const Vocab& v_;
    const std::vector<std::string>& users_;
    std::discrete_distribution<std::size_t> zipf_;
};

std::string numbered(char prefix, std::size_t i, int width)
{
    std::ostringstream s;
    s << prefix << std::setw(width) << std::setfill('0') << i;
    return s.str();
}

} // namespace

SynthResult generate_synthetic(const SynthConfig& cfg)
{
    cfg.validate();
    std::mt19937_64 rng(cfg.seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    // Vocabulary and lexicons.
    WordFactory factory(rng);
    Vocab vocab;
    vocab.innocuous = factory.batch(cfg.innocuous_words, 1, 3);
    vocab.tension = factory.batch(cfg.tension_words, 2, 3);
    for (const auto& root : factory.batch(cfg.hostile_roots, 2, 2)) {
        auto family = variants(root);
        for (std::size_t i = 1; i < family.size(); ++i) {
            factory.reserve(family[i]);
        }
        vocab.hostile.push_back(std::move(family));
    }
    SynthResult result;
    for (std::size_t c = 0; c < kHateCategories.size(); ++c) {
        for (const auto& w : factory.batch(cfg.lexicon_words, 2, 3)) {
            result.lexicons.hate[c].insert(w);
            vocab.lexicon.push_back(w);
        }
    }
    vocab.profane = factory.batch(cfg.profane_words, 1, 2);
    result.lexicons.profane.insert(vocab.profane.begin(), vocab.profane.end());
    for (std::size_t i = 0; i < cfg.emoji; ++i) {
        vocab.happy_emoji.push_back(utf8(static_cast<char32_t>(0x1F600 + i % 16)));
    }
    for (char32_t cp : {0x1F621, 0x1F92C, 0x1F595, 0x1F4A9, 0x1F620, 0x1F44E}) {
        vocab.angry_emoji.push_back(utf8(cp));
    }

    // Users, friend circles, authors.
    std::vector<std::string> users;
    for (std::size_t i = 0; i < cfg.n_users; ++i) {
        users.push_back(numbered('u', i, 5));
    }
    const auto n_hostile_users =
        std::max<std::size_t>(1, static_cast<std::size_t>(cfg.hostile_user_share * static_cast<double>(cfg.n_users)));
    const std::vector<std::string> hostile_users(users.end() - static_cast<std::ptrdiff_t>(n_hostile_users), users.end());
    const std::vector<std::string> regular_users(users.begin(), users.end() - static_cast<std::ptrdiff_t>(n_hostile_users));
    Sampler sampler(cfg, rng, vocab, users);

    std::vector<std::string> authors;
    std::vector<double> vulnerability;
    std::vector<std::vector<std::string>> circles;
    std::vector<double> author_weight;
    for (std::size_t a = 0; a < cfg.n_authors; ++a) {
        authors.push_back(numbered('a', a, 4));
        vulnerability.push_back(cfg.vulnerability_sd * normal(rng));
        std::vector<std::string> circle;
        for (std::size_t i = 0; i < cfg.circle_size; ++i) {
            circle.push_back(sampler.pick(regular_users));
        }
        circles.push_back(std::move(circle));
        author_weight.push_back(std::exp(0.8 * normal(rng)));
    }
    std::discrete_distribution<std::size_t> author_dist(author_weight.begin(), author_weight.end());

    std::vector<double> created;
    for (std::size_t p = 0; p < cfg.n_posts; ++p) {
        created.push_back(1.5e9 + std::floor(unit(rng) * cfg.span_days * 86400.0));
    }
    std::sort(created.begin(), created.end());

    std::lognormal_distribution<double> arrival(std::log(cfg.arrival_hours * 3600.0), cfg.arrival_sigma);
    std::exponential_distribution<double> immediate(1.0 / (cfg.immediate_onset_hours * 3600.0));
    const double delayed_mu =
        std::log(cfg.delayed_onset_hours * 3600.0) - 0.5 * cfg.delayed_onset_sigma * cfg.delayed_onset_sigma;
    std::lognormal_distribution<double> delayed(delayed_mu, cfg.delayed_onset_sigma);
    std::lognormal_distribution<double> followup(std::log(cfg.followup_hours * 3600.0), 1.2);
    std::geometric_distribution<int> low_extra(1.0 / cfg.low_volume);
    const double nb_p = 3.0 / (3.0 + (cfg.high_volume - 4.0));
    std::negative_binomial_distribution<int> high_extra(3, nb_p);
    auto count = [&](double median) {
        std::lognormal_distribution<double> d(std::log(median), cfg.comments_sigma);
        return 1 + static_cast<std::size_t>(std::floor(d(rng)));
    };
    constexpr double kMaxTime = 90.0 * 86400.0;

    std::vector<Post> posts;
    for (std::size_t p = 0; p < cfg.n_posts; ++p) {
        const std::size_t a = author_dist(rng);
        const double v = vulnerability[a];
        const bool hostile = unit(rng) < 1.0 / (1.0 + std::exp(-(cfg.hostile_base + v)));

        Post post;
        post.id = numbered('p', p, 5);
        post.author = authors[a];
        post.created_at = created[p];

        int archetype = -1;
        double onset = 0.0;
        int volume = 0;
        if (hostile) {
            std::array<double, 4> w{};
            for (int k = 0; k < 4; ++k) {
                w[static_cast<std::size_t>(k)] =
                    cfg.cluster_mix[static_cast<std::size_t>(k)] * std::exp(k >= 2 ? cfg.volume_tilt * v : 0.0);
            }
            archetype = static_cast<int>(std::discrete_distribution<std::size_t>(w.begin(), w.end())(rng));
            onset = std::min(kMaxTime, archetype % 2 == 0 ? immediate(rng) : delayed(rng));
            volume = archetype >= 2 ? 4 + high_extra(rng) : 1 + low_extra(rng);
        }

        struct Draft {
            double t;
            bool hostile;
            bool escalate;
            std::string author;
        };
        std::vector<Draft> drafts;
        const std::size_t quiet = count(hostile ? cfg.hostile_comments : cfg.quiet_comments);
        const auto& circle = circles[a];
        for (std::size_t i = 0; i < quiet; ++i) {
            const double t = std::min(kMaxTime, std::floor(arrival(rng)));
            const bool before = hostile && t < std::floor(onset);
            std::string who;
            if (before && sampler.coin(cfg.lurker_rate)) {
                who = sampler.pick(hostile_users);
            } else if (sampler.coin(hostile ? cfg.hostile_friend_rate : cfg.friend_rate)) {
                who = sampler.pick(circle);
            } else {
                who = sampler.pick(regular_users);
            }
            drafts.push_back({t, false, false, who});
        }
        for (int h = 0; h < volume; ++h) {
            const double t = h == 0 ? std::floor(onset) : std::min(kMaxTime, std::floor(onset + followup(rng)));
            const bool escalate =
                h == 0 && sampler.coin(std::min(0.95, cfg.escalation_base + cfg.escalation_slope * volume));
            drafts.push_back({t, true, escalate, sampler.pick(hostile_users)});
        }

        const double first = hostile ? std::floor(onset) : 0.0;
        for (std::size_t i = 0; i < drafts.size(); ++i) {
            const auto& d = drafts[i];
            Comment c;
            c.id = numbered('c', i, 4);
            c.author = d.author;
            c.t = d.t;
            c.hostile = d.hostile;
            if (d.hostile) {
                c.text = sampler.hostile(d.escalate);
            } else {
                double extra = 0.0;
                if (hostile && d.t < first) {
                    const double boost = archetype >= 2 ? 1.0 : 0.7;
                    extra = boost * (cfg.tension_floor +
                                     cfg.tension_peak * std::exp(-(first - d.t) / (cfg.tension_hours * 3600.0)));
                }
                c.text = sampler.innocuous(cfg.tension_base + extra, cfg.mention_rate + cfg.tension_mention * extra);
            }
            post.comments.push_back(std::move(c));
        }
        posts.push_back(std::move(post));
        result.archetype.push_back(archetype);
    }
    result.corpus = Corpus(std::move(posts));
    return result;
}

} // namespace hostility
