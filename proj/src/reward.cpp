#include "omnijigsaw/reward.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

#include "omnijigsaw/error.hpp"

namespace omnijigsaw {

std::string_view to_string(ContinuityMode m) { return m == ContinuityMode::Aligned ? "aligned" : "adjacency"; }

std::optional<ContinuityMode> parse_continuity_mode(std::string_view s) {
  if (s == "aligned") return ContinuityMode::Aligned;
  if (s == "adjacency") return ContinuityMode::Adjacency;
  return std::nullopt;
}

double positional_accuracy(std::span<const int> pred, std::span<const int> truth) {
  if (truth.empty() || pred.size() != truth.size()) return 0.0;
  int hits = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) hits += pred[i] == truth[i] ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(truth.size());
}

double continuity_accuracy(std::span<const int> pred, std::span<const int> truth, ContinuityMode mode) {
  if (truth.size() < 2 || pred.size() != truth.size()) return 0.0;
  const std::size_t pairs = truth.size() - 1;
  int hits = 0;
  if (mode == ContinuityMode::Aligned) {
    for (std::size_t i = 0; i < pairs; ++i) hits += (pred[i] == truth[i] && pred[i + 1] == truth[i + 1]) ? 1 : 0;
  } else {
    std::multiset<std::pair<int, int>> predicted;
    for (std::size_t i = 0; i < pairs; ++i) predicted.emplace(pred[i], pred[i + 1]);
    for (std::size_t i = 0; i < pairs; ++i) {
      const auto it = predicted.find({truth[i], truth[i + 1]});
      if (it != predicted.end()) {
        predicted.erase(it);
        ++hits;
      }
    }
  }
  return static_cast<double>(hits) / static_cast<double>(pairs);
}

double repetition_penalty(std::string_view response, int ngram, int threshold, double penalty) {
  if (ngram <= 0) return 0.0;
  std::vector<std::string> tokens;
  {
    std::istringstream in{std::string(response)};
    for (std::string t; in >> t;) tokens.push_back(std::move(t));
  }
  const auto n = static_cast<std::size_t>(ngram);
  if (tokens.size() < n) return 0.0;
  std::map<std::vector<std::string_view>, int> counts;
  for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
    std::vector<std::string_view> key(tokens.begin() + static_cast<std::ptrdiff_t>(i),
                                      tokens.begin() + static_cast<std::ptrdiff_t>(i + n));
    if (++counts[std::move(key)] > threshold) return penalty;
  }
  return 0.0;
}

RewardBreakdown total_reward(std::string_view raw_response, std::span<const int> truth, const RewardConfig& config) {
  RewardBreakdown b;
  const ParsedRollout parsed = parse_rollout(raw_response, config.tag_style);
  b.format_ok = parsed.format_ok;
  b.parsed_ok = parsed.indices.has_value();
  b.r_fmt = b.format_ok ? config.r_fmt : 0.0;
  b.r_rep = repetition_penalty(raw_response, config.ngram, config.rep_threshold, config.r_rep);
  if (b.parsed_ok) {
    const auto& pred = *parsed.indices;
    b.r_pos = positional_accuracy(pred, truth);
    b.r_cont = continuity_accuracy(pred, truth, config.continuity);
    b.perfect = std::equal(pred.begin(), pred.end(), truth.begin(), truth.end());
  }
  b.lambda = b.perfect ? config.lambda_perfect : config.lambda_imperfect;
  b.r_total = b.r_rep + b.r_fmt + b.lambda * (config.w_pos * b.r_pos + config.w_cont * b.r_cont);
  return b;
}

RewardBreakdown total_reward(std::string_view raw_response, const PuzzleInstance& puzzle, const RewardConfig& config) {
  return total_reward(raw_response, puzzle.ground_truth(), config);
}

std::string synthetic_response(std::span<const int> pred, TagStyle style) {
  const std::string tag(to_string(style));
  return "<" + tag + ">Ordering the clips by their content.</" + tag + "><answer>" + format_index_sequence(pred) +
         "</answer>";
}

std::vector<GradeRow> grade_exhaustive(std::span<const int> truth, const RewardConfig& config) {
  const int n = static_cast<int>(truth.size());
  if (n < 2) throw Error(ErrorCode::NTooSmall, "grade_exhaustive needs n >= 2");
  if (n > kMaxExhaustiveN) throw Error(ErrorCode::NTooLarge, "grade_exhaustive supports n <= 8");
  std::vector<int> pred(static_cast<std::size_t>(n));
  std::iota(pred.begin(), pred.end(), 1);
  std::vector<GradeRow> rows;
  do {
    rows.push_back({pred, total_reward(synthetic_response(pred, config.tag_style), truth, config)});
  } while (std::next_permutation(pred.begin(), pred.end()));
  return rows;
}

}  // namespace omnijigsaw
