#pragma once

// Text similarity scores used both to grade injected-error outputs against
// the error-free baseline and to score ingested datasets.
//
// rouge1: clipped unigram matches divided by reference length (recall form).
// bleu:   geometric mean of clipped n-gram precisions for n = 1..min(max_n,
//         |generated|) with uniform weights, times the brevity penalty
//         BP = 1 if c > r else exp(1 - r/c). Any zero precision (or an empty
//         generated sequence) scores 0; there is no smoothing.

#include <algorithm>
#include <cmath>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "cled/errors.hpp"

namespace cled {

template <typename Token>
double rouge1(std::span<const Token> generated, std::span<const Token> reference) {
    if (reference.empty()) {
        throw PreconditionError("rouge1 requires a non-empty reference");
    }
    std::map<Token, long> ref_counts;
    for (const Token& t : reference) {
        ++ref_counts[t];
    }
    long matches = 0;
    for (const Token& t : generated) {
        auto it = ref_counts.find(t);
        if (it != ref_counts.end() && it->second > 0) {
            --it->second;
            ++matches;
        }
    }
    return static_cast<double>(matches) / static_cast<double>(reference.size());
}

template <typename Token>
double bleu(std::span<const Token> generated, std::span<const Token> reference, int max_n = 4) {
    if (reference.empty()) {
        throw PreconditionError("bleu requires a non-empty reference");
    }
    if (max_n < 1) {
        throw PreconditionError("bleu requires max_n >= 1");
    }
    const long c = static_cast<long>(generated.size());
    const long r = static_cast<long>(reference.size());
    if (c == 0) {
        return 0.0;
    }

    const int used_n = static_cast<int>(std::min<long>(max_n, c));
    double log_precision_sum = 0.0;
    for (int n = 1; n <= used_n; ++n) {
        std::map<std::vector<Token>, long> ref_grams;
        for (long i = 0; i + n <= r; ++i) {
            std::vector<Token> gram(reference.begin() + i, reference.begin() + i + n);
            ++ref_grams[std::move(gram)];
        }
        long matched = 0;
        const long total = c - n + 1;
        std::map<std::vector<Token>, long> gen_grams;
        for (long i = 0; i + n <= c; ++i) {
            std::vector<Token> gram(generated.begin() + i, generated.begin() + i + n);
            ++gen_grams[std::move(gram)];
        }
        for (const auto& [gram, count] : gen_grams) {
            auto it = ref_grams.find(gram);
            if (it != ref_grams.end()) {
                matched += std::min(count, it->second);
            }
        }
        if (matched == 0) {
            return 0.0;
        }
        log_precision_sum += std::log(static_cast<double>(matched) / static_cast<double>(total));
    }

    const double brevity = c > r ? 1.0 : std::exp(1.0 - static_cast<double>(r) / static_cast<double>(c));
    return brevity * std::exp(log_precision_sum / used_n);
}

// Convenience overloads for the common token containers.
inline double rouge1(const std::vector<int>& gen, const std::vector<int>& ref) {
    return rouge1<int>(gen, ref);
}
inline double rouge1(const std::vector<std::string>& gen, const std::vector<std::string>& ref) {
    return rouge1<std::string>(gen, ref);
}
inline double bleu(const std::vector<int>& gen, const std::vector<int>& ref, int max_n = 4) {
    return bleu<int>(gen, ref, max_n);
}
inline double bleu(const std::vector<std::string>& gen, const std::vector<std::string>& ref,
                   int max_n = 4) {
    return bleu<std::string>(gen, ref, max_n);
}

/// Tokenization for text-level metric scoring: lowercase, then split on
/// whitespace. Punctuation stays attached to its word.
std::vector<std::string> metric_tokens(const std::string& text);

} // namespace cled
