#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "cled/errors.hpp"

namespace cled {

/// One text with its error label. `provenance_json` is an optional JSON
/// object (as text) carrying e.g. injection metadata; empty means none.
struct LabeledSample {
    std::string text;
    int label = 0;                  // 0 = clean, 1 = erroneous
    std::string source = "synthetic"; // ingested | toy-injection | synthetic
    std::string provenance_json;
};

/// JSONL with one {"text", "label", "source"?, "provenance"?} object per
/// line. Labels accept 0/1 and "clean"/"erroneous". Unknown fields are
/// folded into provenance rather than dropped. Errors carry line numbers.
std::vector<LabeledSample> load_jsonl(const std::filesystem::path& path);
void save_jsonl(const std::filesystem::path& path, const std::vector<LabeledSample>& samples);

struct SplitResult {
    std::vector<LabeledSample> train;
    std::vector<LabeledSample> test;
};

/// Seeded stratified split: each class is shuffled with its own derived
/// seed and cut at round(fraction * class size), so class proportions hold
/// within one sample and the two parts partition the input exactly.
SplitResult stratified_split(const std::vector<LabeledSample>& samples, double train_fraction,
                             std::uint64_t seed);

// The three corruption shapes observed in bit-flip outputs: a degenerate
// input-independent phrase loop, consonant-heavy pseudo-word streams, and
// in-place word duplication.
enum class CorruptionMode { fixed_string, random_similar_strings, grammar_repetition };

std::string to_string(CorruptionMode mode);
CorruptionMode corruption_mode_from_string(const std::string& name);

/// Deterministic in (clean, mode, seed). fixed_string ignores the input
/// entirely (same seed -> same text for any input); random_similar_strings
/// matches the input's rough length; grammar_repetition duplicates 10-30%
/// of the words in place and keeps every original token in order.
std::string synthesize_corruption(const std::string& clean, CorruptionMode mode,
                                  std::uint64_t seed);

/// Sentences of the bundled English corpus, one per line in the asset; the
/// CLED_CORPUS environment variable overrides with a file of the same shape.
std::vector<std::string> builtin_corpus_lines();
std::vector<std::string> corpus_lines_from_file(const std::filesystem::path& path);

/// Summary-length passage: 2-4 consecutive sentences joined with spaces.
std::string sample_passage(const std::vector<std::string>& lines, std::uint64_t seed);

/// clean_count passages labeled clean plus corrupt_count corrupted passages,
/// modes cycling fixed : random : repetition at 3 : 6 : 1 (the observed
/// error-type proportions). Sample i draws from derive_seed(seed, i).
std::vector<LabeledSample> make_synthetic_dataset(int clean_count, int corrupt_count,
                                                  std::uint64_t seed);

/// Adapter for externally published error datasets: accepts JSONL with
/// common field spellings (text/summary/output/..., label/is_error/...),
/// normalizes to LabeledSample with source "ingested".
std::vector<LabeledSample> ingest_dataset(const std::filesystem::path& path);

} // namespace cled
