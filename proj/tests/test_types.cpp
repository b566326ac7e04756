#include <algorithm>
#include <numeric>
#include <random>

#include "doctest.h"
#include "omnijigsaw/error.hpp"
#include "omnijigsaw/types.hpp"

using namespace omnijigsaw;

TEST_CASE("permutation rejects non-bijections") {
  CHECK_THROWS_AS(Permutation({1, 1, 2}), Error);
  CHECK_THROWS_AS(Permutation({0, 1, 2}), Error);
  CHECK_THROWS_AS(Permutation({1, 2, 4}), Error);
  CHECK_NOTHROW(Permutation({3, 1, 2}));
  CHECK(Permutation::identity(4).forward_array() == std::vector<int>{1, 2, 3, 4});
}

TEST_CASE("inverse undoes forward") {
  const Permutation p({3, 1, 4, 2});
  for (int i = 1; i <= 4; ++i) CHECK(p.inverse(p.forward(i)) == i);
  CHECK(p.inverse_array() == std::vector<int>{2, 4, 1, 3});
  CHECK(p.answer() == p.forward_array());
}

TEST_CASE("shuffled position j holds chronological clip pi^-1(j)") {
  // clip i lands at position π(i)
  const Permutation p({2, 3, 1});
  const std::vector<char> chrono{'a', 'b', 'c'};
  const auto shuffled = shuffle_by<char>(chrono, p);
  CHECK(shuffled == std::vector<char>{'c', 'a', 'b'});
  CHECK(reassemble<char>(shuffled, p.answer()) == chrono);
}

TEST_CASE("reassembly with the answer restores order for random permutations") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 2 + static_cast<int>(rng() % 9);
    std::vector<int> fwd(static_cast<std::size_t>(n));
    std::iota(fwd.begin(), fwd.end(), 1);
    std::shuffle(fwd.begin(), fwd.end(), rng);
    const Permutation p(fwd);
    std::vector<int> chrono(static_cast<std::size_t>(n));
    std::iota(chrono.begin(), chrono.end(), 100);
    const auto shuffled = shuffle_by<int>(chrono, p);
    REQUIRE(reassemble<int>(shuffled, p.answer()) == chrono);
  }
}

TEST_CASE("reassemble skips out-of-range indices") {
  const std::vector<int> shuffled{7, 8};
  const std::vector<int> answer{2, 0, 3, 1};
  CHECK(reassemble<int>(shuffled, answer) == std::vector<int>{8, 7});
}

TEST_CASE("enum string round trips") {
  for (auto s : {Strategy::Jmi, Strategy::Sms, Strategy::Cmm, Strategy::Video, Strategy::Audio})
    CHECK(parse_strategy(to_string(s)) == s);
  CHECK(parse_strategy("cmm") == Strategy::Cmm);
  CHECK_FALSE(parse_strategy("jigsaw").has_value());
  for (auto r : {RejectReason::Invalid, RejectReason::TooLong, RejectReason::MissingStream, RejectReason::StaticVideo,
                 RejectReason::Silence, RejectReason::LowFlux, RejectReason::VadOutOfBounds, RejectReason::VadError,
                 RejectReason::SemanticNo})
    CHECK(parse_reject_reason(to_string(r)) == r);
  CHECK(parse_clip_modality("VA") == ClipModality::VA);
  CHECK_FALSE(parse_clip_modality("AV").has_value());
}

TEST_CASE("sample validation") {
  OmniSample s;
  s.duration_s = 2.0;
  s.has_video = true;
  Frame f{2, 2, 0.0, std::vector<std::uint8_t>(12, 0)};
  s.video = {f, f};
  CHECK_THROWS_AS(validate(s), Error);  // equal timestamps
  s.video[1].timestamp_s = 1.0;
  CHECK_NOTHROW(validate(s));
  s.video[1].rgb.pop_back();
  CHECK_THROWS_AS(validate(s), Error);
  s.video[1].rgb.push_back(0);
  s.has_audio = true;
  CHECK_THROWS_AS(validate(s), Error);
  s.duration_s = 0.0;
  s.has_audio = false;
  CHECK_THROWS_AS(validate(s), Error);
}

TEST_CASE("waveform duration") {
  Waveform w{16000, std::vector<float>(8000)};
  CHECK(w.duration_s() == doctest::Approx(0.5));
  CHECK(Waveform{0, {}}.duration_s() == 0.0);
}
