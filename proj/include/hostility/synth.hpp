#pragma once

#include "hostility/corpus.hpp"
#include "hostility/text.hpp"

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace hostility {

/// Parameters of the synthetic thread generator. Archetypes: 0 early onset
/// with few hostile comments, 1 delayed onset with few, 2 and 3 the same
/// onsets at higher volume.
struct SynthConfig {
    std::uint64_t seed = 1;
    std::size_t n_posts = 1134;
    std::size_t n_authors = 320;
    std::size_t n_users = 3000;
    double span_days = 120.0;

    double hostile_base = 0.25;     ///< logit intercept of P(post hostile)
    double vulnerability_sd = 1.6;  ///< sd of the per-author logit offset
    std::array<double, 4> cluster_mix = {0.22, 0.18, 0.33, 0.27};
    double volume_tilt = 0.5;       ///< extra log-weight of high-volume archetypes per unit vulnerability

    double immediate_onset_hours = 1.0; ///< exponential mean
    double delayed_onset_hours = 19.0;  ///< lognormal mean
    double delayed_onset_sigma = 1.1;
    double low_volume = 3.0;
    double high_volume = 9.5;
    double followup_hours = 3.0;        ///< median gap from onset to later hostile comments

    double quiet_comments = 11.0;   ///< median comment count of non-hostile posts
    double hostile_comments = 20.0; ///< median non-hostile comment count of hostile posts
    double comments_sigma = 0.9;
    double arrival_hours = 6.0;     ///< median comment time
    double arrival_sigma = 2.0;

    std::size_t innocuous_words = 2000;
    std::size_t tension_words = 40;
    std::size_t hostile_roots = 60;
    std::size_t lexicon_words = 12; ///< per hate category
    std::size_t profane_words = 40;
    std::size_t emoji = 24;

    double lexicon_rate = 0.15;     ///< hostile comments using a lexicon word
    double subtle_rate = 0.2;       ///< hostile comments without hostile vocabulary
    double noise_rate = 0.04;       ///< innocuous comments with a hostile root
    double mention_rate = 0.1;
    double hostile_mention_rate = 0.35;
    double emoji_rate = 0.25;
    double profane_rate = 0.02;     ///< innocuous comments with a profane word

    double tension_base = 0.03;
    double tension_peak = 0.6;
    double tension_hours = 4.0;
    double tension_floor = 0.08;    ///< tension of any pre-onset comment on a hostile post
    double tension_mention = 0.5;   ///< extra mention probability per unit of tension boost

    double friend_rate = 0.6;
    double hostile_friend_rate = 0.45; ///< friend rate on posts that turn hostile
    double lurker_rate = 0.1;          ///< pre-onset comments on hostile posts written by hostile users
    std::size_t circle_size = 12;
    double hostile_user_share = 0.08;

    double escalation_base = 0.15;
    double escalation_slope = 0.06; ///< per hostile comment on the post

    /// Throws ConfigError for out-of-range values.
    void validate() const;
};

std::string synth_config_to_json(const SynthConfig& cfg);
/// Missing keys keep their defaults; unknown keys are a ConfigError.
SynthConfig synth_config_from_json(const std::string& text);

struct SynthResult {
    Corpus corpus;
    Lexicons lexicons;
    std::vector<int> archetype; ///< per post, -1 for non-hostile posts
};

SynthResult generate_synthetic(const SynthConfig& cfg);

} // namespace hostility
