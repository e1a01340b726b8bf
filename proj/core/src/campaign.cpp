#include "cled/campaign.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>

#include <nlohmann/json.hpp>

#include "cled/lingfeat.hpp"
#include "cled/metrics.hpp"
#include "cled/rng.hpp"

namespace cled {

namespace {

double pair_score(const std::vector<int>& generated, const std::vector<int>& baseline) {
    if (baseline.empty()) return generated.empty() ? 1.0 : 0.0;
    return rouge1(generated, baseline);
}

// Error-free outputs plus per-input encoder outputs. Injections whose target
// cannot reach the encoder (decoder/prediction sections) reuse the encoder
// outputs, which roughly halves trial cost.
struct TrialContext {
    MiniTransformer& model;
    const std::vector<std::vector<int>>& inputs;
    int max_len;
    std::vector<Mat> enc_out;
    std::vector<std::vector<int>> baseline;

    TrialContext(MiniTransformer& m, const std::vector<std::vector<int>>& in, int budget)
        : model(m), inputs(in), max_len(budget) {
        if (inputs.empty()) throw PreconditionError("injection runs need at least one input");
        enc_out.reserve(inputs.size());
        baseline.reserve(inputs.size());
        for (const auto& tokens : inputs) {
            enc_out.push_back(model.encode(tokens));
            baseline.push_back(model.generate_with_encoded(enc_out.back(), max_len));
        }
    }
};

struct TrialOutcome {
    bool relevant = false;
    double score = 1.0;
};

TrialOutcome run_injection(TrialContext& ctx, std::size_t flat_index, BitPosition position,
                           std::vector<std::vector<int>>* outputs) {
    const BitWord32 pre = BitWord32::from_float(ctx.model.get_param(flat_index));
    const BitWord32 post = flip_bit(pre, position);
    ctx.model.set_param(flat_index, post.to_float());

    const ParamSection section = ctx.model.section_of(flat_index);
    const bool encoder_untouched =
        section == ParamSection::decoder || section == ParamSection::prediction;

    TrialOutcome outcome;
    double score_sum = 0.0;
    for (std::size_t i = 0; i < ctx.inputs.size(); ++i) {
        std::vector<int> out = encoder_untouched
                                   ? ctx.model.generate_with_encoded(ctx.enc_out[i], ctx.max_len)
                                   : ctx.model.generate(ctx.inputs[i], ctx.max_len);
        if (out == ctx.baseline[i]) {
            score_sum += 1.0; // rouge1(x, x) == 1 exactly; skip recomputing it
        } else {
            outcome.relevant = true;
            score_sum += pair_score(out, ctx.baseline[i]);
        }
        if (outputs) outputs->push_back(std::move(out));
    }
    outcome.score = score_sum / static_cast<double>(ctx.inputs.size());

    ctx.model.set_param(flat_index, pre.to_float()); // bit-exact restore
    return outcome;
}

SweepResult sweep_impl(MiniTransformer& model, const std::vector<std::vector<int>>& inputs,
                       BitPosition position, long min_relevant, long max_trials,
                       std::uint64_t seed) {
    require_valid(position);
    if (max_trials < 1) throw PreconditionError("sweep needs at least one trial");

    TrialContext ctx(model, inputs, model.config().max_seq_len);

    SweepResult result;
    result.position = position;
    double relevant_score_sum = 0.0;
    for (long t = 0; t < max_trials; ++t) {
        if (min_relevant > 0 && result.relevant_trials >= min_relevant) break;
        Rng rng(derive_seed(seed, static_cast<std::uint64_t>(t)));
        const std::size_t flat = next_below(rng, model.param_count());
        const TrialOutcome outcome = run_injection(ctx, flat, position, nullptr);
        ++result.trials;
        if (outcome.relevant) {
            ++result.relevant_trials;
            relevant_score_sum += outcome.score;
        }
    }
    if (result.relevant_trials > 0) {
        result.mean_score = relevant_score_sum / static_cast<double>(result.relevant_trials);
    }
    return result;
}

} // namespace

SweepResult sweep(MiniTransformer& model, const std::vector<std::vector<int>>& inputs,
                  BitPosition position, long trials, std::uint64_t seed) {
    return sweep_impl(model, inputs, position, /*min_relevant=*/0, trials, seed);
}

SweepResult sweep_until(MiniTransformer& model, const std::vector<std::vector<int>>& inputs,
                        BitPosition position, long min_relevant, long max_trials,
                        std::uint64_t seed) {
    if (min_relevant < 1) throw PreconditionError("min_relevant must be >= 1");
    return sweep_impl(model, inputs, position, min_relevant, max_trials, seed);
}

std::set<BitPosition> identify_critical_bits(const std::vector<SweepResult>& results,
                                             double baseline_score,
                                             double degradation_threshold) {
    if (results.empty()) throw PreconditionError("no sweep results given");
    if (!(degradation_threshold >= 0.0 && degradation_threshold <= 1.0)) {
        throw PreconditionError("degradation threshold must be in [0, 1]");
    }
    std::set<BitPosition> seen;
    for (const SweepResult& r : results) {
        if (!seen.insert(r.position).second) {
            throw PreconditionError("duplicate sweep result for bit position " +
                                    std::to_string(r.position.index));
        }
    }
    const double cutoff = baseline_score * (1.0 - degradation_threshold);
    std::set<BitPosition> critical;
    for (const SweepResult& r : results) {
        if (r.mean_score < cutoff) critical.insert(r.position);
    }
    return critical;
}

InjectionRecord inject_once(MiniTransformer& model, const std::vector<std::vector<int>>& inputs,
                            std::size_t flat_index, BitPosition position) {
    require_valid(position);
    if (flat_index >= model.param_count()) {
        throw PreconditionError("parameter index out of range");
    }
    TrialContext ctx(model, inputs, model.config().max_seq_len);
    InjectionRecord record;
    record.flat_index = flat_index;
    record.position = position;
    record.pre_bits = BitWord32::from_float(model.get_param(flat_index));
    record.post_bits = flip_bit(record.pre_bits, position);
    const TrialOutcome outcome = run_injection(ctx, flat_index, position, &record.outputs);
    record.relevant = outcome.relevant;
    record.score = outcome.score;
    return record;
}

std::vector<LabeledSample> generate_error_dataset(MiniTransformer& model, const ToyVocab& vocab,
                                                  const std::vector<std::vector<int>>& inputs,
                                                  const ErrorDatasetOptions& options,
                                                  std::uint64_t seed,
                                                  std::vector<InjectionRecord>* records) {
    if (options.num_relevant_errors < 1) {
        throw PreconditionError("num_relevant_errors must be >= 1");
    }
    if (options.max_attempts < 1) throw PreconditionError("max_attempts must be >= 1");
    const int max_len = options.max_len > 0 ? options.max_len : model.config().max_seq_len;
    TrialContext ctx(model, inputs, max_len);

    std::vector<InjectionRecord> relevant;
    for (long attempt = 0; attempt < options.max_attempts; ++attempt) {
        Rng rng(derive_seed(seed, static_cast<std::uint64_t>(attempt)));
        const std::size_t flat = next_below(rng, model.param_count());
        const BitPosition pos{static_cast<int>(next_below(rng, 32))};

        InjectionRecord record;
        record.flat_index = flat;
        record.position = pos;
        record.pre_bits = BitWord32::from_float(model.get_param(flat));
        record.post_bits = flip_bit(record.pre_bits, pos);
        const TrialOutcome outcome = run_injection(ctx, flat, pos, &record.outputs);
        record.relevant = outcome.relevant;
        record.score = outcome.score;
        if (outcome.relevant) {
            relevant.push_back(std::move(record));
            if (static_cast<int>(relevant.size()) >= options.num_relevant_errors) break;
        }
    }
    if (static_cast<int>(relevant.size()) < options.num_relevant_errors) {
        throw GuardLimitError("only " + std::to_string(relevant.size()) + " of " +
                              std::to_string(options.num_relevant_errors) +
                              " relevant errors found within " +
                              std::to_string(options.max_attempts) + " attempts");
    }

    // Changed outputs per relevant error, in input order.
    std::vector<std::vector<std::size_t>> changed(relevant.size());
    std::size_t available = 0;
    for (std::size_t r = 0; r < relevant.size(); ++r) {
        for (std::size_t i = 0; i < inputs.size(); ++i) {
            if (relevant[r].outputs[i] != ctx.baseline[i]) {
                changed[r].push_back(i);
                ++available;
            }
        }
    }
    const std::size_t target = std::min(inputs.size(), available);

    // Even allocation across errors, remainder and shortfalls round-robin.
    std::vector<std::size_t> take(relevant.size(), 0);
    std::size_t assigned = 0;
    while (assigned < target) {
        bool progressed = false;
        for (std::size_t r = 0; r < relevant.size() && assigned < target; ++r) {
            if (take[r] < changed[r].size()) {
                ++take[r];
                ++assigned;
                progressed = true;
            }
        }
        if (!progressed) break;
    }

    std::vector<LabeledSample> samples;
    samples.reserve(2 * target);
    for (std::size_t i = 0; i < target; ++i) {
        LabeledSample s;
        s.text = vocab.decode(ctx.baseline[i]);
        s.label = 0;
        s.source = "toy-injection";
        s.provenance_json = nlohmann::json{{"input_index", i}}.dump();
        samples.push_back(std::move(s));
    }
    char hex[16];
    for (std::size_t r = 0; r < relevant.size(); ++r) {
        for (std::size_t k = 0; k < take[r]; ++k) {
            const std::size_t i = changed[r][k];
            LabeledSample s;
            s.text = vocab.decode(relevant[r].outputs[i]);
            s.label = 1;
            s.source = "toy-injection";
            nlohmann::json prov{{"flat_index", relevant[r].flat_index},
                                {"position", relevant[r].position.index},
                                {"input_index", i}};
            std::snprintf(hex, sizeof(hex), "0x%08X", relevant[r].pre_bits.raw);
            prov["pre_bits"] = hex;
            std::snprintf(hex, sizeof(hex), "0x%08X", relevant[r].post_bits.raw);
            prov["post_bits"] = hex;
            s.provenance_json = prov.dump();
            samples.push_back(std::move(s));
        }
    }
    if (records) *records = std::move(relevant);
    return samples;
}

void write_sweep_csv(const std::filesystem::path& path, const std::vector<SweepResult>& results) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot open " + path.string() + " for writing");
    out << "position,trials,relevant_trials,mean_score\n";
    for (const SweepResult& r : results) {
        out << r.position.index << ',' << r.trials << ',' << r.relevant_trials << ','
            << format_double(r.mean_score) << '\n';
    }
    if (!out) throw DataError("write failed: " + path.string());
}

void write_injection_jsonl(const std::filesystem::path& path,
                           const std::vector<InjectionRecord>& records) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot open " + path.string() + " for writing");
    char hex[16];
    for (const InjectionRecord& r : records) {
        nlohmann::json j{{"flat_index", r.flat_index},
                         {"position", r.position.index},
                         {"relevant", r.relevant},
                         {"score", r.score}};
        std::snprintf(hex, sizeof(hex), "0x%08X", r.pre_bits.raw);
        j["pre_bits"] = hex;
        std::snprintf(hex, sizeof(hex), "0x%08X", r.post_bits.raw);
        j["post_bits"] = hex;
        if (!r.outputs.empty()) j["outputs"] = r.outputs;
        out << j.dump() << '\n';
    }
    if (!out) throw DataError("write failed: " + path.string());
}

} // namespace cled
