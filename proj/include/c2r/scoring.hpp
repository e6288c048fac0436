#pragma once

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

namespace c2r::score {

/// R_comp = 1 / (1 + n_err). Throws ContractViolation for negative counts.
double comp_reward(std::int64_t n_err);

/// Pass-rate alignment reward. Throws ContractViolation when total is zero.
double align_reward_tests(std::size_t passed, std::size_t total);
/// Similarity alignment reward: CodeBLEU of candidate against reference.
double align_reward_similarity(std::string_view candidate, std::string_view reference);

struct RewardBreakdown {
    double r_comp = 0.0;
    double r_align = 0.0;
    double alpha = 1.0;
    double beta = 1.0;
    double total = 0.0;

    bool operator==(const RewardBreakdown&) const = default;
};

/// total = alpha * r_comp + beta * r_align. Weights must be non-negative and not both zero.
RewardBreakdown hybrid_reward(double r_comp, double r_align, double alpha = 1.0, double beta = 1.0);

inline constexpr double kAdvantageEpsilon = 1e-8;

struct GroupScores {
    std::vector<double> rewards;
    std::vector<double> advantages;
    double mean = 0.0;
    double stddev = 0.0; // population
};

/// A_i = (r_i - mean) / max(std, eps) with population std; all zero when std <= eps.
/// Throws ContractViolation for groups smaller than 2.
GroupScores group_advantages(const std::vector<double>& rewards);

/// k3 estimator: r - ln r - 1 for r = pi_ref / pi_theta. Throws for r <= 0.
double kl_estimate(double ratio);

inline constexpr double kClipEpsilon = 0.2;

/// (1/G) sum_i [ min(rho_i A_i, clip(rho_i, 1-eps, 1+eps) A_i) - beta_kl * KL(kl_ratio_i) ].
double grpo_surrogate(const std::vector<double>& prob_ratios, const std::vector<double>& advantages,
                      const std::vector<double>& kl_ratios, double beta_kl, double eps_clip = kClipEpsilon);

struct CandidateEval {
    std::int64_t n_err = 0;
    std::optional<double> r_align; // tests or similarity; 0 when unavailable
};

struct Ranking {
    std::size_t best = 0;
    std::vector<RewardBreakdown> breakdowns;
    std::optional<GroupScores> group; // when G >= 2
};

/// Hybrid reward per candidate, argmax with ties to the lowest index.
Ranking rank_candidates(const std::vector<CandidateEval>& candidates, double alpha = 1.0, double beta = 1.0);

} // namespace c2r::score
