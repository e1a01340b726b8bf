#include "cled/lingfeat.hpp"

#include <cctype>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "cled/assets/pos_lexicon.hpp"

namespace cled {

namespace {

bool is_blank_char(char ch) { return ch == ' ' || ch == '\t' || ch == '\n'; }

bool is_ascii_alpha(unsigned char ch) { return ch < 128 && std::isalpha(ch); }
bool is_ascii_digit(unsigned char ch) { return ch < 128 && std::isdigit(ch); }
bool is_ascii_punct(unsigned char ch) { return ch < 128 && std::ispunct(ch); }

bool is_vowel(unsigned char ch) {
    const unsigned char low = static_cast<unsigned char>(std::tolower(ch));
    return low == 'a' || low == 'e' || low == 'i' || low == 'o' || low == 'u';
}

bool is_consonant(unsigned char ch) { return is_ascii_alpha(ch) && !is_vowel(ch); }

bool has_uppercase_after_first(const std::string& word) {
    if (word.size() < 2) return false;
    for (unsigned char ch : word) {
        if (!is_ascii_alpha(ch)) return false;
    }
    for (std::size_t i = 1; i < word.size(); ++i) {
        if (std::isupper(static_cast<unsigned char>(word[i]))) return true;
    }
    return false;
}

bool has_consonant_run(const std::string& word, int min_run) {
    int run = 0;
    for (unsigned char ch : word) {
        if (is_consonant(ch)) {
            if (++run >= min_run) return true;
        } else {
            run = 0;
        }
    }
    return false;
}

bool has_equal_char_run(const std::string& word, int min_run) {
    int run = 0;
    int prev = -1;
    for (unsigned char ch : word) {
        const int low = std::tolower(ch);
        run = (low == prev) ? run + 1 : 1;
        if (run >= min_run) return true;
        prev = low;
    }
    return false;
}

std::string fold_core(const std::string& word) {
    std::size_t begin = 0;
    std::size_t end = word.size();
    while (begin < end && is_ascii_punct(static_cast<unsigned char>(word[begin]))) ++begin;
    while (end > begin && is_ascii_punct(static_cast<unsigned char>(word[end - 1]))) --end;
    std::string core;
    core.reserve(end - begin);
    for (std::size_t i = begin; i < end; ++i) {
        core.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(word[i]))));
    }
    return core;
}

bool ends_with(const std::string& s, std::string_view suffix) {
    return s.size() >= suffix.size() &&
           s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

} // namespace

const std::array<std::string, kNumFeatures>& feature_names() {
    static const std::array<std::string, kNumFeatures> names{
        "uppercase_middle", "four_or_more_consonants", "three_or_more_eq_chars",
        "punctuation_mark", "digit",                   "blank",
        "vowel",            "words_density",           "ADP",
        "NUM",              "VERB",                    "DET",
        "PRON",             "NOUN",                    "PRT",
        "ADV"};
    return names;
}

std::string to_string(PosTag tag) {
    switch (tag) {
        case PosTag::ADP: return "ADP";
        case PosTag::NUM: return "NUM";
        case PosTag::VERB: return "VERB";
        case PosTag::DET: return "DET";
        case PosTag::PRON: return "PRON";
        case PosTag::NOUN: return "NOUN";
        case PosTag::PRT: return "PRT";
        case PosTag::ADV: return "ADV";
        case PosTag::OTHER: return "OTHER";
    }
    return "OTHER";
}

std::optional<PosTag> parse_pos_tag(const std::string& name) {
    if (name == "ADP") return PosTag::ADP;
    if (name == "NUM") return PosTag::NUM;
    if (name == "VERB") return PosTag::VERB;
    if (name == "DET") return PosTag::DET;
    if (name == "PRON") return PosTag::PRON;
    if (name == "NOUN") return PosTag::NOUN;
    if (name == "PRT") return PosTag::PRT;
    if (name == "ADV") return PosTag::ADV;
    if (name == "OTHER") return PosTag::OTHER;
    return std::nullopt;
}

std::vector<std::string> split_words(const std::string& text) {
    std::vector<std::string> words;
    std::string current;
    for (unsigned char ch : text) {
        if (ch < 128 && std::isspace(ch)) {
            if (!current.empty()) {
                words.push_back(std::move(current));
                current.clear();
            }
        } else {
            current.push_back(static_cast<char>(ch));
        }
    }
    if (!current.empty()) words.push_back(std::move(current));
    return words;
}

const PosTagger& PosTagger::bundled() {
    static const PosTagger tagger{assets::pos_lexicon()};
    return tagger;
}

PosTagger::PosTagger(std::string_view lexicon_tsv) {
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= lexicon_tsv.size()) {
        ++line_no;
        std::size_t eol = lexicon_tsv.find('\n', pos);
        if (eol == std::string_view::npos) eol = lexicon_tsv.size();
        std::string_view line = lexicon_tsv.substr(pos, eol - pos);
        pos = eol + 1;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (line.empty() || line.front() == '#') {
            if (eol == lexicon_tsv.size()) break;
            continue;
        }
        const std::size_t tab = line.find('\t');
        if (tab == std::string_view::npos) {
            throw DataError("lexicon line " + std::to_string(line_no) + ": missing tab separator");
        }
        std::string word(line.substr(0, tab));
        std::string tag_name(line.substr(tab + 1));
        const auto tag = parse_pos_tag(tag_name);
        if (word.empty() || !tag) {
            throw DataError("lexicon line " + std::to_string(line_no) + ": bad entry '" +
                            std::string(line) + "'");
        }
        if (!lexicon_.emplace(std::move(word), *tag).second) {
            throw DataError("lexicon line " + std::to_string(line_no) + ": duplicate word");
        }
        if (eol == lexicon_tsv.size()) break;
    }
}

PosTag PosTagger::tag(const std::string& word) const {
    const std::string core = fold_core(word);
    if (core.empty()) return PosTag::OTHER;
    if (auto it = lexicon_.find(core); it != lexicon_.end()) return it->second;
    bool all_digits = true;
    for (unsigned char ch : core) {
        if (!is_ascii_digit(ch)) {
            all_digits = false;
            break;
        }
    }
    if (all_digits) return PosTag::NUM;
    if (ends_with(core, "ly")) return PosTag::ADV;
    if (ends_with(core, "ing") || ends_with(core, "ed")) return PosTag::VERB;
    return PosTag::NOUN;
}

std::vector<TaggedToken> PosTagger::tag_words(const std::vector<std::string>& words) const {
    std::vector<TaggedToken> tagged;
    tagged.reserve(words.size());
    for (const std::string& w : words) {
        tagged.push_back({w, tag(w)});
    }
    return tagged;
}

FeatureVector extract_features(const std::string& text, const PosTagger& tagger) {
    FeatureVector fv{};

    long punct = 0, digits = 0, blanks = 0, vowels = 0, alpha = 0;
    for (unsigned char ch : text) {
        if (is_ascii_punct(ch)) ++punct;
        if (is_ascii_digit(ch)) ++digits;
        if (is_blank_char(static_cast<char>(ch))) ++blanks;
        if (is_vowel(ch)) ++vowels;
        if (is_ascii_alpha(ch)) ++alpha;
    }
    const double chars = static_cast<double>(text.size());
    if (chars > 0) {
        fv[3] = static_cast<double>(punct) / chars;
        fv[4] = static_cast<double>(digits) / chars;
        fv[5] = static_cast<double>(blanks) / chars;
        fv[6] = static_cast<double>(vowels) / chars;
    }

    const std::vector<std::string> words = split_words(text);
    if (words.empty()) return fv;

    long upper_mid = 0, consonant_runs = 0, repeat_runs = 0;
    std::array<long, 8> tag_counts{};
    for (const std::string& w : words) {
        if (has_uppercase_after_first(w)) ++upper_mid;
        if (has_consonant_run(w, 4)) ++consonant_runs;
        if (has_equal_char_run(w, 3)) ++repeat_runs;
        const PosTag t = tagger.tag(w);
        if (t != PosTag::OTHER) ++tag_counts[static_cast<int>(t)];
    }
    const double nwords = static_cast<double>(words.size());
    fv[0] = static_cast<double>(upper_mid) / nwords;
    fv[1] = static_cast<double>(consonant_runs) / nwords;
    fv[2] = static_cast<double>(repeat_runs) / nwords;
    if (alpha > 0) fv[7] = nwords / static_cast<double>(alpha);
    for (int t = 0; t < 8; ++t) {
        fv[8 + t] = static_cast<double>(tag_counts[t]) / nwords;
    }
    return fv;
}

FeatureVector extract_features(const std::string& text) {
    return extract_features(text, PosTagger::bundled());
}

std::string format_double(double value) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), value);
    return std::string(buf, res.ptr);
}

void write_feature_csv(const std::filesystem::path& path, const FeatureTable& table) {
    if (table.has_labels() && table.labels.size() != table.rows.size()) {
        throw PreconditionError("label count does not match row count");
    }
    std::ofstream out(path);
    if (!out) throw DataError("cannot open " + path.string() + " for writing");
    const auto& names = feature_names();
    for (int i = 0; i < kNumFeatures; ++i) {
        if (i) out << ',';
        out << names[i];
    }
    if (table.has_labels()) out << ",label";
    out << '\n';
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        for (int i = 0; i < kNumFeatures; ++i) {
            if (i) out << ',';
            out << format_double(table.rows[r][i]);
        }
        if (table.has_labels()) out << ',' << table.labels[r];
        out << '\n';
    }
    if (!out) throw DataError("write failed: " + path.string());
}

FeatureTable read_feature_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path.string());

    auto split_line = [](const std::string& line) {
        std::vector<std::string> cells;
        std::string cell;
        for (char ch : line) {
            if (ch == ',') {
                cells.push_back(std::move(cell));
                cell.clear();
            } else if (ch != '\r') {
                cell.push_back(ch);
            }
        }
        cells.push_back(std::move(cell));
        return cells;
    };

    std::string line;
    if (!std::getline(in, line)) throw DataError("empty feature file: " + path.string());
    const std::vector<std::string> header = split_line(line);
    const auto& names = feature_names();
    bool labeled = false;
    if (header.size() == kNumFeatures + 1 && header.back() == "label") {
        labeled = true;
    } else if (header.size() != kNumFeatures) {
        throw DataError(path.string() + ": header has " + std::to_string(header.size()) +
                        " columns, expected the 16 feature names (+ optional label)");
    }
    for (int i = 0; i < kNumFeatures; ++i) {
        if (header[i] != names[i]) {
            throw DataError(path.string() + ": feature column " + std::to_string(i) + " is '" +
                            header[i] + "', expected '" + names[i] +
                            "' (feature order is fixed)");
        }
    }

    FeatureTable table;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const std::vector<std::string> cells = split_line(line);
        if (cells.size() != header.size()) {
            throw DataError(path.string() + " line " + std::to_string(line_no) +
                            ": wrong column count");
        }
        FeatureVector fv{};
        for (int i = 0; i < kNumFeatures; ++i) {
            const std::string& cell = cells[i];
            const char* first = cell.data();
            const char* last = first + cell.size();
            const auto res = std::from_chars(first, last, fv[i]);
            if (res.ec != std::errc() || res.ptr != last) {
                throw DataError(path.string() + " line " + std::to_string(line_no) +
                                ": bad number '" + cell + "'");
            }
        }
        table.rows.push_back(fv);
        if (labeled) {
            const std::string& cell = cells.back();
            if (cell == "0") {
                table.labels.push_back(0);
            } else if (cell == "1") {
                table.labels.push_back(1);
            } else {
                throw DataError(path.string() + " line " + std::to_string(line_no) +
                                ": label must be 0 or 1, got '" + cell + "'");
            }
        }
    }
    return table;
}

} // namespace cled
