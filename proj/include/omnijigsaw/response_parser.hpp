#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace omnijigsaw {

/// Reasoning tag convention. `Thinking` also accepts `<think>` as an alias,
/// but one response never mixes the two.
enum class TagStyle { Think, Thinking };

std::string_view to_string(TagStyle style);
std::optional<TagStyle> parse_tag_style(std::string_view s);

struct FormatCheck {
  bool ok = false;
  std::string reasoning;
  std::string answer;
};

/// True iff the trimmed response is exactly one reasoning block followed by
/// exactly one answer block, with only whitespace between and around them.
FormatCheck check_format(std::string_view raw, TagStyle style = TagStyle::Thinking);

/// Comma-separated base-10 integers. Whitespace around tokens and one trailing
/// period are tolerated. Values are not range-checked.
/// Throws Error(EmptyAnswer) or Error(NonIntegerToken).
std::vector<int> parse_index_sequence(std::string_view answer_text);

/// "2, 3, 1"
std::string format_index_sequence(std::span<const int> indices);

enum class ParseError { BadFormat, EmptyAnswer, NonIntegerToken };
std::string_view to_string(ParseError e);

struct ParsedRollout {
  std::string think_text;
  std::string answer_text;
  std::optional<std::vector<int>> indices;
  bool format_ok = false;
  std::optional<ParseError> parse_error;
};

/// Format check, then index parsing of the answer block. Indices are only
/// extracted from well-formed responses.
ParsedRollout parse_rollout(std::string_view raw, TagStyle style = TagStyle::Thinking);

namespace text {

std::string_view trim(std::string_view s);

/// Body of the first <tag>…</tag> block at or after `from`; `end` receives the
/// offset just past the closing tag.
std::optional<std::string_view> find_block(std::string_view s, std::string_view tag, std::size_t from = 0,
                                           std::size_t* end = nullptr);

/// Answer block that follows the reasoning block when there is one, otherwise
/// the first answer block. Used for judge-style outputs.
std::optional<std::string_view> answer_after_reasoning(std::string_view s);

}  // namespace text

}  // namespace omnijigsaw
