#pragma once

// Puzzle package on disk:
//
//   <dir>/puzzle.json
//   <dir>/clip_01.ojm … clip_NN.ojm   (shuffled order; masked streams absent)

#include <filesystem>

#include "omnijigsaw/serialize.hpp"
#include "omnijigsaw/types.hpp"

namespace omnijigsaw {

/// Writes the package atomically (staging directory, then rename) and returns
/// the path of puzzle.json. An existing package at `dir` is replaced.
std::filesystem::path write_puzzle_package(const PuzzleInstance& puzzle, const std::filesystem::path& dir,
                                           int sample_rate_hz = 16000);

/// Loads puzzle.json and checks every clip file against its metadata.
/// Throws Error(InvalidJson) on any mismatch.
PuzzleDocument validate_puzzle_package(const std::filesystem::path& dir);

}  // namespace omnijigsaw
