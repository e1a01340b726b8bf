#pragma once

#include <cstdint>
#include <filesystem>
#include <set>
#include <string>
#include <vector>

#include "cled/corpus.hpp"
#include "cled/floatbits.hpp"
#include "cled/transformer.hpp"

namespace cled {

/// Aggregate of one bit-position sweep. mean_score is the average per-trial
/// similarity (rouge1 of the perturbed outputs against the error-free
/// outputs, averaged over the input set) over relevant trials only; it is
/// 1.0 by convention when no trial was relevant.
struct SweepResult {
    BitPosition position;
    long trials = 0;
    long relevant_trials = 0;
    double mean_score = 1.0;
    std::string score_metric = "rouge1";
};

struct InjectionRecord {
    std::size_t flat_index = 0;
    BitPosition position;
    BitWord32 pre_bits;
    BitWord32 post_bits;
    bool relevant = false;
    double score = 1.0;
    std::vector<std::vector<int>> outputs; // per input, token ids (may be empty if not kept)
};

/// One sweep at a fixed bit position: each trial flips that bit in a
/// uniformly random parameter (trial t draws from derive_seed(seed, t)),
/// reruns every input, scores against the error-free baseline, and restores
/// the bit. A trial is relevant when any output differs. The model is
/// mutated during the run but restored bit-exactly before returning.
SweepResult sweep(MiniTransformer& model, const std::vector<std::vector<int>>& inputs,
                  BitPosition position, long trials, std::uint64_t seed);

/// Same trial stream, but stops once min_relevant relevant trials were seen,
/// or after max_trials. Running this is identical to sweep() truncated at
/// the same trial count.
SweepResult sweep_until(MiniTransformer& model, const std::vector<std::vector<int>>& inputs,
                        BitPosition position, long min_relevant, long max_trials,
                        std::uint64_t seed);

/// Positions whose mean relevant-trial score fell below
/// baseline_score * (1 - degradation_threshold). Results must not repeat a
/// position.
std::set<BitPosition> identify_critical_bits(const std::vector<SweepResult>& results,
                                             double baseline_score,
                                             double degradation_threshold);

/// Single targeted injection with full output capture (bit restored on
/// return).
InjectionRecord inject_once(MiniTransformer& model, const std::vector<std::vector<int>>& inputs,
                            std::size_t flat_index, BitPosition position);

struct ErrorDatasetOptions {
    int num_relevant_errors = 10;
    long max_attempts = 100000; // guard; exceeding it raises GuardLimitError
    int max_len = 0;            // decode budget; 0 = model max_seq_len
};

/// The labeled-dataset protocol: inject random single-bit errors (random
/// parameter, random bit position) until num_relevant_errors of them change
/// at least one output; emit the error-free generations as clean samples and
/// an equal number of changed generations as erroneous samples, allocated
/// evenly across the relevant errors. If the relevant errors changed fewer
/// outputs than there are inputs, the clean side is trimmed to keep the
/// labels balanced. Every erroneous sample carries its injection metadata.
std::vector<LabeledSample> generate_error_dataset(MiniTransformer& model, const ToyVocab& vocab,
                                                  const std::vector<std::vector<int>>& inputs,
                                                  const ErrorDatasetOptions& options,
                                                  std::uint64_t seed,
                                                  std::vector<InjectionRecord>* records = nullptr);

/// CSV: position,trials,relevant_trials,mean_score
void write_sweep_csv(const std::filesystem::path& path, const std::vector<SweepResult>& results);

/// JSONL, one record per line with bit patterns in hex.
void write_injection_jsonl(const std::filesystem::path& path,
                           const std::vector<InjectionRecord>& records);

} // namespace cled
