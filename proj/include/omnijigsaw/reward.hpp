#pragma once

// Composite rollout reward:
//
//   r_total = r_rep + r_fmt + λ · (w_pos · r_pos + w_cont · r_cont)
//
// r_fmt rewards strict tag structure, r_rep penalizes degenerate repetition,
// and λ discounts every answer that is not an exact match.

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "omnijigsaw/response_parser.hpp"
#include "omnijigsaw/types.hpp"

namespace omnijigsaw {

/// `Aligned` compares (pred_i, pred_i+1) with (truth_i, truth_i+1) position by
/// position. `Adjacency` counts truth-adjacent pairs present anywhere in pred.
enum class ContinuityMode { Aligned, Adjacency };

std::string_view to_string(ContinuityMode m);
std::optional<ContinuityMode> parse_continuity_mode(std::string_view s);

struct RewardConfig {
  double w_pos = 0.5;
  double w_cont = 0.5;
  double r_fmt = 0.2;
  double r_rep = -0.5;
  double lambda_perfect = 1.0;
  double lambda_imperfect = 0.2;
  int ngram = 20;
  int rep_threshold = 3;
  ContinuityMode continuity = ContinuityMode::Aligned;
  TagStyle tag_style = TagStyle::Thinking;
};

/// Fraction of positions where pred matches truth; 0 on length mismatch.
double positional_accuracy(std::span<const int> pred, std::span<const int> truth);

/// Fraction of the N-1 adjacent pairs preserved; 0 on length mismatch or N < 2.
double continuity_accuracy(std::span<const int> pred, std::span<const int> truth,
                           ContinuityMode mode = ContinuityMode::Aligned);

/// `penalty` if any whitespace-token n-gram occurs more than `threshold` times, else 0.
double repetition_penalty(std::string_view response, int ngram = 20, int threshold = 3, double penalty = -0.5);

RewardBreakdown total_reward(std::string_view raw_response, std::span<const int> truth, const RewardConfig& config = {});
RewardBreakdown total_reward(std::string_view raw_response, const PuzzleInstance& puzzle,
                             const RewardConfig& config = {});

/// A well-formatted rollout whose answer is `pred`.
std::string synthetic_response(std::span<const int> pred, TagStyle style = TagStyle::Thinking);

struct GradeRow {
  std::vector<int> pred;
  RewardBreakdown breakdown;
};

inline constexpr int kMaxExhaustiveN = 8;

/// Grades every permutation of {1..n} (lexicographic order) as a synthetic
/// response against `truth`. Throws Error(NTooSmall|NTooLarge).
std::vector<GradeRow> grade_exhaustive(std::span<const int> truth, const RewardConfig& config = {});

}  // namespace omnijigsaw
