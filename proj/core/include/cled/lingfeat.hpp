#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "cled/errors.hpp"

namespace cled {

// The 16 text statistics fed to the error classifier, always in this order
// (the order is part of the model-file contract):
//   0 uppercase_middle          words with an uppercase letter after index 0
//   1 four_or_more_consonants   words containing a run of >= 4 consonants
//   2 three_or_more_eq_chars    words containing a run of >= 3 equal chars
//   3 punctuation_mark          punctuation characters / all characters
//   4 digit                     digit characters / all characters
//   5 blank                     blank characters / all characters
//   6 vowel                     vowel characters / all characters
//   7 words_density             words / alphabetic characters
//   8..15 POS frequencies       ADP NUM VERB DET PRON NOUN PRT ADV / words
// Word-level features divide by the word count, character-level features by
// the character count; a zero denominator yields 0.
inline constexpr int kNumFeatures = 16;

using FeatureVector = std::array<double, kNumFeatures>;

const std::array<std::string, kNumFeatures>& feature_names();

enum class PosTag { ADP, NUM, VERB, DET, PRON, NOUN, PRT, ADV, OTHER };

std::string to_string(PosTag tag);
std::optional<PosTag> parse_pos_tag(const std::string& name);

struct TaggedToken {
    std::string surface;
    PosTag tag = PosTag::OTHER;
};

/// Words are maximal non-whitespace runs. "" -> no words.
std::vector<std::string> split_words(const std::string& text);

/// Deterministic tagger: case-folded lexicon lookup with edge punctuation
/// stripped, then suffix rules for unknown words (all digits -> NUM,
/// -ly -> ADV, -ing/-ed -> VERB), default NOUN. Tokens that strip to nothing
/// (pure punctuation) tag as OTHER.
class PosTagger {
public:
    /// Tagger over the lexicon bundled into the library.
    static const PosTagger& bundled();

    /// Lexicon text: one "word<TAB>TAG" entry per line, '#' comments allowed.
    explicit PosTagger(std::string_view lexicon_tsv);

    PosTag tag(const std::string& word) const;
    std::vector<TaggedToken> tag_words(const std::vector<std::string>& words) const;

    std::size_t lexicon_size() const { return lexicon_.size(); }

private:
    std::unordered_map<std::string, PosTag> lexicon_;
};

FeatureVector extract_features(const std::string& text, const PosTagger& tagger);
/// Same, with the bundled tagger.
FeatureVector extract_features(const std::string& text);

/// Feature rows as read from / written to CSV. The header carries the 16
/// fixed feature names plus an optional trailing "label" column.
struct FeatureTable {
    std::vector<FeatureVector> rows;
    std::vector<int> labels; // empty when unlabeled, else one per row

    bool has_labels() const { return !labels.empty(); }
};

void write_feature_csv(const std::filesystem::path& path, const FeatureTable& table);
FeatureTable read_feature_csv(const std::filesystem::path& path);

/// Shortest decimal form that parses back to exactly the same double; used
/// for all CSV number output so reruns are byte-identical.
std::string format_double(double value);

} // namespace cled
