#include "cled/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>

#include <nlohmann/json.hpp>

#include "cled/assets/corpus_en.hpp"
#include "cled/lingfeat.hpp"
#include "cled/rng.hpp"

namespace cled {

namespace {

int parse_label(const nlohmann::json& value, std::size_t line_no) {
    if (value.is_number_integer()) {
        const long v = value.get<long>();
        if (v == 0 || v == 1) return static_cast<int>(v);
    } else if (value.is_boolean()) {
        return value.get<bool>() ? 1 : 0;
    } else if (value.is_string()) {
        const std::string s = value.get<std::string>();
        if (s == "clean" || s == "correct" || s == "ok" || s == "0") return 0;
        if (s == "erroneous" || s == "error" || s == "faulty" || s == "wrong" || s == "1") return 1;
    }
    throw DataError("line " + std::to_string(line_no) +
                    ": label must be 0, 1, \"clean\" or \"erroneous\"");
}

LabeledSample sample_from_json(const nlohmann::json& j, std::size_t line_no) {
    if (!j.is_object()) {
        throw DataError("line " + std::to_string(line_no) + ": expected a JSON object");
    }
    if (!j.contains("text") || !j.at("text").is_string()) {
        throw DataError("line " + std::to_string(line_no) + ": missing string field 'text'");
    }
    if (!j.contains("label")) {
        throw DataError("line " + std::to_string(line_no) + ": missing field 'label'");
    }
    LabeledSample sample;
    sample.text = j.at("text").get<std::string>();
    sample.label = parse_label(j.at("label"), line_no);
    sample.source = j.value("source", "ingested");

    nlohmann::json prov = nlohmann::json::object();
    if (j.contains("provenance")) {
        prov = j.at("provenance");
        if (!prov.is_object()) {
            prov = nlohmann::json{{"value", j.at("provenance")}};
        }
    }
    for (const auto& [key, value] : j.items()) {
        if (key == "text" || key == "label" || key == "source" || key == "provenance") continue;
        prov[key] = value;
    }
    if (!prov.empty()) sample.provenance_json = prov.dump();
    return sample;
}

} // namespace

std::vector<LabeledSample> load_jsonl(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path.string());
    std::vector<LabeledSample> samples;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw DataError(path.string() + " line " + std::to_string(line_no) + ": " + e.what());
        }
        samples.push_back(sample_from_json(j, line_no));
    }
    return samples;
}

void save_jsonl(const std::filesystem::path& path, const std::vector<LabeledSample>& samples) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot open " + path.string() + " for writing");
    for (const LabeledSample& s : samples) {
        nlohmann::json j{{"text", s.text}, {"label", s.label}, {"source", s.source}};
        if (!s.provenance_json.empty()) {
            try {
                j["provenance"] = nlohmann::json::parse(s.provenance_json);
            } catch (const nlohmann::json::exception& e) {
                throw DataError(std::string("sample provenance is not valid JSON: ") + e.what());
            }
        }
        out << j.dump() << '\n';
    }
    if (!out) throw DataError("write failed: " + path.string());
}

SplitResult stratified_split(const std::vector<LabeledSample>& samples, double train_fraction,
                             std::uint64_t seed) {
    if (samples.empty()) throw PreconditionError("cannot split an empty sample set");
    if (!(train_fraction >= 0.0 && train_fraction <= 1.0)) {
        throw PreconditionError("train fraction must be in [0, 1]");
    }
    SplitResult result;
    for (int cls = 0; cls <= 1; ++cls) {
        std::vector<std::size_t> members;
        for (std::size_t i = 0; i < samples.size(); ++i) {
            if ((samples[i].label == 1 ? 1 : 0) == cls) members.push_back(i);
        }
        Rng rng(derive_seed(seed, static_cast<std::uint64_t>(cls)));
        for (std::size_t i = members.size(); i > 1; --i) {
            std::swap(members[i - 1], members[next_below(rng, i)]);
        }
        std::size_t n_train = static_cast<std::size_t>(
            std::llround(train_fraction * static_cast<double>(members.size())));
        n_train = std::min(n_train, members.size());
        for (std::size_t i = 0; i < members.size(); ++i) {
            (i < n_train ? result.train : result.test).push_back(samples[members[i]]);
        }
    }
    return result;
}

std::string to_string(CorruptionMode mode) {
    switch (mode) {
        case CorruptionMode::fixed_string: return "fixed_string";
        case CorruptionMode::random_similar_strings: return "random_similar_strings";
        case CorruptionMode::grammar_repetition: return "grammar_repetition";
    }
    return "fixed_string";
}

CorruptionMode corruption_mode_from_string(const std::string& name) {
    if (name == "fixed_string") return CorruptionMode::fixed_string;
    if (name == "random_similar_strings") return CorruptionMode::random_similar_strings;
    if (name == "grammar_repetition") return CorruptionMode::grammar_repetition;
    throw DataError("unknown corruption mode: " + name);
}

namespace {

std::string corrupt_fixed(Rng& rng) {
    // Degenerate short-word loop; independent of the clean input by design.
    // The pool skews toward very short function-like tokens so the word-count
    // to letter-count ratio lands far outside the range of natural prose.
    static const char* const kPool[] = {"the", "thea", "he", "a", "die", "the:"};
    const int count = 14 + static_cast<int>(next_below(rng, 8));
    std::string out;
    for (int i = 0; i < count; ++i) {
        if (!out.empty()) out.push_back(' ');
        const std::uint64_t r = next_below(rng, 10);
        out += r < 5 ? kPool[0] : kPool[r - 4];
    }
    return out;
}

std::string corrupt_random_similar(const std::string& clean, Rng& rng) {
    static const char kConsonants[] = "bcdfgklmnprsstvdrbr"; // skewed toward clusters
    static const char kVowels[] = "aeiou";
    const std::size_t target = std::clamp<std::size_t>(clean.size(), 40, 300);
    std::string out;
    std::string prev_cluster;
    while (out.size() < target) {
        std::string word;
        const int syllables = 2 + static_cast<int>(next_below(rng, 3));
        for (int s = 0; s < syllables; ++s) {
            if (s > 0 && !prev_cluster.empty() && next_below(rng, 10) < 4) {
                word += prev_cluster; // repeated cluster: "berber", "cercers"
                continue;
            }
            std::string cluster;
            const int len = 2 + static_cast<int>(next_below(rng, 3));
            for (int c = 0; c < len; ++c) {
                cluster.push_back(kConsonants[next_below(rng, sizeof(kConsonants) - 1)]);
            }
            if (next_below(rng, 10) < 6) {
                cluster.push_back(kVowels[next_below(rng, 5)]);
            }
            word += cluster;
            prev_cluster = cluster;
        }
        const std::uint64_t deco = next_below(rng, 12);
        if (deco == 0) word.insert(0, ".");
        if (deco == 1) word += " -";
        if (!out.empty()) out.push_back(' ');
        out += word;
    }
    return out;
}

// Degenerate decoding loops repeat the same token run over and over rather
// than sprinkling isolated duplicates, so the inserted copies are
// concentrated on one or two anchor words. Every original token is kept in
// order; only copies are added, totalling 10-30% of the word count.
std::string corrupt_repetition(const std::string& clean, Rng& rng) {
    const std::vector<std::string> words = split_words(clean);
    if (words.empty()) return clean;
    const std::size_t n = words.size();
    const double rate = 0.10 + next_unit(rng) * 0.20;
    std::size_t copies = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::llround(rate * static_cast<double>(n))));

    const std::size_t anchors = copies >= 4 && next_below(rng, 2) == 1 ? 2 : 1;
    std::vector<std::size_t> extra(n, 0);
    std::size_t first = next_below(rng, n);
    extra[first] = anchors == 1 ? copies : copies / 2;
    if (anchors == 2) {
        std::size_t second = next_below(rng, n - 1);
        if (second >= first) ++second;
        extra[second] = copies - extra[first];
    }

    std::string out;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t k = 0; k <= extra[i]; ++k) {
            if (!out.empty()) out.push_back(' ');
            out += words[i];
        }
    }
    return out;
}

} // namespace

std::string synthesize_corruption(const std::string& clean, CorruptionMode mode,
                                  std::uint64_t seed) {
    if (clean.empty()) throw PreconditionError("corruption needs a non-empty clean text");
    Rng rng(derive_seed(seed, 0x40 + static_cast<std::uint64_t>(mode)));
    switch (mode) {
        case CorruptionMode::fixed_string: return corrupt_fixed(rng);
        case CorruptionMode::random_similar_strings: return corrupt_random_similar(clean, rng);
        case CorruptionMode::grammar_repetition: return corrupt_repetition(clean, rng);
    }
    throw PreconditionError("unknown corruption mode");
}

namespace {

std::vector<std::string> lines_from_text(std::string_view text, const std::string& origin) {
    std::vector<std::string> lines;
    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t eol = text.find('\n', pos);
        if (eol == std::string_view::npos) eol = text.size();
        std::string_view line = text.substr(pos, eol - pos);
        pos = eol + 1;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (!line.empty()) lines.emplace_back(line);
    }
    if (lines.empty()) throw DataError(origin + ": corpus has no sentences");
    return lines;
}

} // namespace

std::vector<std::string> corpus_lines_from_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open corpus file " + path.string());
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return lines_from_text(text, path.string());
}

std::vector<std::string> builtin_corpus_lines() {
    if (const char* env = std::getenv("CLED_CORPUS"); env && *env) {
        return corpus_lines_from_file(env);
    }
    return lines_from_text(assets::corpus_en(), "builtin corpus");
}

std::string sample_passage(const std::vector<std::string>& lines, std::uint64_t seed) {
    if (lines.empty()) throw PreconditionError("passage sampling needs a non-empty corpus");
    Rng rng(seed);
    std::size_t count = 2 + next_below(rng, 3);
    count = std::min(count, lines.size());
    const std::size_t start = next_below(rng, lines.size() - count + 1);
    std::string passage;
    for (std::size_t i = 0; i < count; ++i) {
        if (!passage.empty()) passage.push_back(' ');
        passage += lines[start + i];
    }
    return passage;
}

std::vector<LabeledSample> make_synthetic_dataset(int clean_count, int corrupt_count,
                                                  std::uint64_t seed) {
    if (clean_count < 0 || corrupt_count < 0) {
        throw PreconditionError("sample counts must be >= 0");
    }
    const std::vector<std::string> lines = builtin_corpus_lines();
    std::vector<LabeledSample> samples;
    samples.reserve(static_cast<std::size_t>(clean_count + corrupt_count));
    for (int i = 0; i < clean_count; ++i) {
        LabeledSample s;
        s.text = sample_passage(lines, derive_seed(seed, static_cast<std::uint64_t>(i)));
        s.label = 0;
        s.source = "synthetic";
        samples.push_back(std::move(s));
    }
    // Mode mix mirrors how often each error class survives the "keep only
    // injections that changed an output" filter: degenerate fixed loops and
    // random pseudo-word streams dominate what an injection campaign actually
    // collects, while mild grammar-level repetition is the rare tail class.
    static const CorruptionMode kCycle[] = {
        CorruptionMode::fixed_string,           CorruptionMode::fixed_string,
        CorruptionMode::fixed_string,           CorruptionMode::random_similar_strings,
        CorruptionMode::random_similar_strings, CorruptionMode::random_similar_strings,
        CorruptionMode::random_similar_strings, CorruptionMode::random_similar_strings,
        CorruptionMode::random_similar_strings, CorruptionMode::grammar_repetition};
    constexpr std::size_t kCycleLen = sizeof(kCycle) / sizeof(kCycle[0]);
    for (int j = 0; j < corrupt_count; ++j) {
        const CorruptionMode mode = kCycle[static_cast<std::size_t>(j) % kCycleLen];
        const std::string base =
            sample_passage(lines, derive_seed(seed, 0x100000 + static_cast<std::uint64_t>(j)));
        LabeledSample s;
        s.text = synthesize_corruption(base, mode,
                                       derive_seed(seed, 0x200000 + static_cast<std::uint64_t>(j)));
        s.label = 1;
        s.source = "synthetic";
        s.provenance_json = nlohmann::json{{"mode", to_string(mode)}}.dump();
        samples.push_back(std::move(s));
    }
    return samples;
}

std::vector<LabeledSample> ingest_dataset(const std::filesystem::path& path) {
    static const char* const kTextKeys[] = {"text",       "summary",    "output",
                                            "generated",  "generated_text", "translation",
                                            "hypothesis", "prediction", "sentence"};
    static const char* const kLabelKeys[] = {"label", "is_error", "erroneous", "error",
                                             "is_erroneous", "faulty", "y", "class"};
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path.string());
    std::vector<LabeledSample> samples;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw DataError(path.string() + " line " + std::to_string(line_no) + ": " + e.what());
        }
        if (!j.is_object()) {
            throw DataError(path.string() + " line " + std::to_string(line_no) +
                            ": expected a JSON object");
        }
        const char* text_key = nullptr;
        for (const char* key : kTextKeys) {
            if (j.contains(key) && j.at(key).is_string()) {
                text_key = key;
                break;
            }
        }
        const char* label_key = nullptr;
        for (const char* key : kLabelKeys) {
            if (j.contains(key)) {
                label_key = key;
                break;
            }
        }
        if (!text_key || !label_key) {
            throw DataError(path.string() + " line " + std::to_string(line_no) +
                            ": could not find text/label fields to ingest");
        }
        LabeledSample sample;
        sample.text = j.at(text_key).get<std::string>();
        sample.label = parse_label(j.at(label_key), line_no);
        sample.source = "ingested";
        nlohmann::json prov = nlohmann::json::object();
        for (const auto& [key, value] : j.items()) {
            if (key == text_key || key == label_key) continue;
            prov[key] = value;
        }
        if (!prov.empty()) sample.provenance_json = prov.dump();
        samples.push_back(std::move(sample));
    }
    return samples;
}

} // namespace cled
