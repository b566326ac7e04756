#include "omnijigsaw/response_parser.hpp"

#include <charconv>

#include "omnijigsaw/error.hpp"

namespace omnijigsaw {

namespace text {

std::string_view trim(std::string_view s) {
  constexpr std::string_view kWs = " \t\r\n\f\v";
  const auto b = s.find_first_not_of(kWs);
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(kWs);
  return s.substr(b, e - b + 1);
}

std::optional<std::string_view> find_block(std::string_view s, std::string_view tag, std::size_t from,
                                           std::size_t* end) {
  const std::string open = "<" + std::string(tag) + ">";
  const std::string close = "</" + std::string(tag) + ">";
  const auto b = s.find(open, from);
  if (b == std::string_view::npos) return std::nullopt;
  const auto body = b + open.size();
  const auto e = s.find(close, body);
  if (e == std::string_view::npos) return std::nullopt;
  if (end) *end = e + close.size();
  return s.substr(body, e - body);
}

std::optional<std::string_view> answer_after_reasoning(std::string_view s) {
  std::size_t after = 0;
  for (std::string_view tag : {"thinking", "think"}) {
    std::size_t end = 0;
    if (find_block(s, tag, 0, &end)) {
      after = end;
      break;
    }
  }
  return find_block(s, "answer", after);
}

}  // namespace text

std::string_view to_string(TagStyle style) { return style == TagStyle::Think ? "think" : "thinking"; }

std::optional<TagStyle> parse_tag_style(std::string_view s) {
  if (s == "think") return TagStyle::Think;
  if (s == "thinking") return TagStyle::Thinking;
  return std::nullopt;
}

std::string_view to_string(ParseError e) {
  switch (e) {
    case ParseError::BadFormat: return "BAD_FORMAT";
    case ParseError::EmptyAnswer: return "EMPTY_ANSWER";
    case ParseError::NonIntegerToken: return "NON_INTEGER_TOKEN";
  }
  return "BAD_FORMAT";
}

namespace {

std::size_t count(std::string_view s, std::string_view needle) {
  std::size_t n = 0;
  for (auto pos = s.find(needle); pos != std::string_view::npos; pos = s.find(needle, pos + needle.size())) ++n;
  return n;
}

bool only_whitespace(std::string_view s) { return text::trim(s).empty(); }

}  // namespace

FormatCheck check_format(std::string_view raw, TagStyle style) {
  FormatCheck out;
  const std::string_view s = text::trim(raw);

  const std::size_t think_tags = count(s, "<think>") + count(s, "</think>");
  const std::size_t thinking_tags = count(s, "<thinking>") + count(s, "</thinking>");
  if (think_tags > 0 && thinking_tags > 0) return out;

  std::string_view tag;
  if (thinking_tags > 0) {
    if (style != TagStyle::Thinking) return out;
    tag = "thinking";
  } else {
    tag = "think";
  }
  const std::string open = "<" + std::string(tag) + ">";
  const std::string close = "</" + std::string(tag) + ">";
  if (count(s, open) != 1 || count(s, close) != 1) return out;
  if (count(s, "<answer>") != 1 || count(s, "</answer>") != 1) return out;

  if (!s.starts_with(open)) return out;
  const auto r_end = s.find(close);
  const auto a_open = s.find("<answer>");
  const auto a_close = s.find("</answer>");
  if (r_end == std::string_view::npos || a_open < r_end || a_close < a_open) return out;
  if (!only_whitespace(s.substr(r_end + close.size(), a_open - (r_end + close.size())))) return out;
  if (a_close + std::string_view("</answer>").size() != s.size()) return out;

  out.ok = true;
  out.reasoning = std::string(s.substr(open.size(), r_end - open.size()));
  const auto body = a_open + std::string_view("<answer>").size();
  out.answer = std::string(s.substr(body, a_close - body));
  return out;
}

std::vector<int> parse_index_sequence(std::string_view answer_text) {
  std::string_view t = text::trim(answer_text);
  if (t.empty()) throw Error(ErrorCode::EmptyAnswer, "empty answer");
  if (t.back() == '.') t = text::trim(t.substr(0, t.size() - 1));
  if (t.empty()) throw Error(ErrorCode::EmptyAnswer, "empty answer");
  std::vector<int> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = t.find(',', start);
    const std::string_view tok = text::trim(t.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
    int value = 0;
    const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), value, 10);
    if (tok.empty() || ec != std::errc() || ptr != tok.data() + tok.size())
      throw Error(ErrorCode::NonIntegerToken, "non-integer token '" + std::string(tok) + "'");
    out.push_back(value);
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

std::string format_index_sequence(std::span<const int> indices) {
  std::string out;
  for (std::size_t i = 0; i < indices.size(); ++i) {
    if (i) out += ", ";
    out += std::to_string(indices[i]);
  }
  return out;
}

ParsedRollout parse_rollout(std::string_view raw, TagStyle style) {
  ParsedRollout out;
  const FormatCheck fc = check_format(raw, style);
  out.format_ok = fc.ok;
  if (!fc.ok) {
    out.parse_error = ParseError::BadFormat;
    return out;
  }
  out.think_text = fc.reasoning;
  out.answer_text = fc.answer;
  try {
    out.indices = parse_index_sequence(fc.answer);
  } catch (const Error& e) {
    out.parse_error = e.code() == ErrorCode::EmptyAnswer ? ParseError::EmptyAnswer : ParseError::NonIntegerToken;
  }
  return out;
}

}  // namespace omnijigsaw
