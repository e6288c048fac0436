#include "c2r/scoring.hpp"

#include "c2r/codebleu.hpp"
#include "c2r/util/text.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace c2r::score {

double comp_reward(std::int64_t n_err) {
    if (n_err < 0) throw ContractViolation("error count must be non-negative, got " + std::to_string(n_err));
    return 1.0 / (1.0 + static_cast<double>(n_err));
}

double align_reward_tests(std::size_t passed, std::size_t total) {
    if (total == 0) throw ContractViolation("pass-rate reward needs at least one test; use similarity mode");
    if (passed > total) throw ContractViolation("more tests passed than exist");
    return static_cast<double>(passed) / static_cast<double>(total);
}

double align_reward_similarity(std::string_view candidate, std::string_view reference) {
    return codebleu(candidate, reference).total;
}

RewardBreakdown hybrid_reward(double r_comp, double r_align, double alpha, double beta) {
    if (alpha < 0 || beta < 0) throw ContractViolation("reward weights must be non-negative");
    if (alpha == 0 && beta == 0) throw ContractViolation("reward weights must not both be zero");
    return {r_comp, r_align, alpha, beta, alpha * r_comp + beta * r_align};
}

GroupScores group_advantages(const std::vector<double>& rewards) {
    if (rewards.size() < 2) throw ContractViolation("group needs at least two rewards");
    GroupScores g;
    g.rewards = rewards;
    double n = static_cast<double>(rewards.size());
    double sum = 0.0;
    for (double r : rewards) sum += r;
    g.mean = sum / n;
    double ss = 0.0;
    for (double r : rewards) ss += (r - g.mean) * (r - g.mean);
    g.stddev = std::sqrt(ss / n);
    g.advantages.assign(rewards.size(), 0.0);
    if (g.stddev > kAdvantageEpsilon) {
        for (std::size_t i = 0; i < rewards.size(); ++i) g.advantages[i] = (rewards[i] - g.mean) / g.stddev;
    }
    return g;
}

double kl_estimate(double ratio) {
    if (!(ratio > 0.0)) throw ContractViolation("KL ratio must be positive");
    return ratio - std::log(ratio) - 1.0;
}

double grpo_surrogate(const std::vector<double>& prob_ratios, const std::vector<double>& advantages,
                      const std::vector<double>& kl_ratios, double beta_kl, double eps_clip) {
    if (prob_ratios.size() != advantages.size() || prob_ratios.size() != kl_ratios.size())
        throw ContractViolation("surrogate inputs must have equal lengths");
    if (prob_ratios.empty()) throw ContractViolation("surrogate needs a non-empty group");
    double sum = 0.0;
    for (std::size_t i = 0; i < prob_ratios.size(); ++i) {
        double rho = prob_ratios[i];
        if (!(rho > 0.0)) throw ContractViolation("probability ratios must be positive");
        double clipped = std::clamp(rho, 1.0 - eps_clip, 1.0 + eps_clip);
        sum += std::min(rho * advantages[i], clipped * advantages[i]) - beta_kl * kl_estimate(kl_ratios[i]);
    }
    return sum / static_cast<double>(prob_ratios.size());
}

Ranking rank_candidates(const std::vector<CandidateEval>& candidates, double alpha, double beta) {
    if (candidates.empty()) throw ContractViolation("no candidates to rank");
    Ranking out;
    std::vector<double> totals;
    for (const auto& c : candidates) {
        out.breakdowns.push_back(hybrid_reward(comp_reward(c.n_err), c.r_align.value_or(0.0), alpha, beta));
        totals.push_back(out.breakdowns.back().total);
    }
    for (std::size_t i = 1; i < totals.size(); ++i) {
        if (totals[i] > totals[out.best]) out.best = i;
    }
    if (candidates.size() >= 2) out.group = group_advantages(totals);
    return out;
}

} // namespace c2r::score
