#include <doctest.h>

#include <algorithm>
#include <map>
#include <string>
#include <vector>

#include "cled/metrics.hpp"
#include "cled/rng.hpp"

using namespace cled;

namespace {

// Brute-force clipped-multiset oracle: per distinct token, the number of
// matches is min(count in generated, count in reference).
double rouge1_oracle(const std::vector<int>& gen, const std::vector<int>& ref) {
    std::map<int, long> gen_counts, ref_counts;
    for (int t : gen) ++gen_counts[t];
    for (int t : ref) ++ref_counts[t];
    long matches = 0;
    for (const auto& [token, count] : gen_counts) {
        auto it = ref_counts.find(token);
        if (it != ref_counts.end()) matches += std::min(count, it->second);
    }
    return static_cast<double>(matches) / static_cast<double>(ref.size());
}

std::vector<int> random_tokens(Rng& rng, std::size_t min_len, std::size_t max_len,
                               int vocab) {
    std::vector<int> out(min_len + next_below(rng, max_len - min_len + 1));
    for (int& t : out) t = static_cast<int>(next_below(rng, static_cast<std::uint64_t>(vocab)));
    return out;
}

} // namespace

TEST_CASE("rouge1 equals the multiset oracle on random pairs") {
    Rng rng(0x0E1);
    for (int i = 0; i < 200; ++i) {
        const std::vector<int> gen = random_tokens(rng, 0, 12, 6);
        const std::vector<int> ref = random_tokens(rng, 1, 12, 6);
        CHECK(rouge1(gen, ref) == rouge1_oracle(gen, ref));
    }
}

TEST_CASE("identical sequences score 1.0 on both metrics") {
    Rng rng(0x0E2);
    for (int i = 0; i < 50; ++i) {
        const std::vector<int> x = random_tokens(rng, 4, 15, 9);
        CHECK(rouge1(x, x) == 1.0);
        CHECK(bleu(x, x) == 1.0);
    }
}

TEST_CASE("worked unigram example: clipped overlap 4 of 6") {
    const std::vector<std::string> ref = {"the", "cat", "sat", "on", "the", "mat"};
    const std::vector<std::string> gen = {"the", "cat", "lay", "on", "a", "mat"};
    CHECK(rouge1(gen, ref) == doctest::Approx(4.0 / 6.0).epsilon(1e-9));
}

TEST_CASE("worked brevity-penalty example: short exact prefix") {
    // Both used precisions are 1, n caps at the generated length 2, so the
    // score is exactly the brevity penalty exp(1 - 3/2).
    const std::vector<std::string> gen = {"the", "cat"};
    const std::vector<std::string> ref = {"the", "cat", "sat"};
    CHECK(bleu(gen, ref) == doctest::Approx(std::exp(1.0 - 3.0 / 2.0)).epsilon(1e-9));
}

TEST_CASE("bleu zeroes out on any missing n-gram and empty generation") {
    const std::vector<int> ref = {1, 2, 3, 4, 5};
    CHECK(bleu(std::vector<int>{}, ref) == 0.0);
    CHECK(bleu(std::vector<int>{9, 9, 9, 9}, ref) == 0.0);
    // All unigrams match but no bigram does -> p_2 = 0 -> score 0.
    CHECK(bleu(std::vector<int>{2, 1, 4, 3}, ref) == 0.0);
}

TEST_CASE("bleu brevity penalty switches exactly at c > r") {
    const std::vector<int> ref = {1, 2, 3};
    // c = 4 > r = 3: BP = 1; the extra token costs precision instead.
    CHECK(bleu(std::vector<int>{1, 2, 3, 1}, ref, 1) == doctest::Approx(0.75).epsilon(1e-12));
    // c = r: BP = exp(0) = 1, exact match of all unigrams.
    CHECK(bleu(std::vector<int>{1, 2, 3}, ref, 1) == 1.0);
}

TEST_CASE("both metrics stay within [0,1] on random pairs") {
    Rng rng(0x0E3);
    for (int i = 0; i < 500; ++i) {
        const std::vector<int> gen = random_tokens(rng, 0, 20, 5);
        const std::vector<int> ref = random_tokens(rng, 1, 20, 5);
        const double r = rouge1(gen, ref);
        const double b = bleu(gen, ref);
        CHECK(r >= 0.0);
        CHECK(r <= 1.0);
        CHECK(b >= 0.0);
        CHECK(b <= 1.0);
    }
}

TEST_CASE("bleu is invariant under vocabulary relabeling") {
    Rng rng(0x0E4);
    const int kVocab = 7;
    for (int i = 0; i < 100; ++i) {
        std::vector<int> perm(kVocab);
        for (int v = 0; v < kVocab; ++v) perm[static_cast<std::size_t>(v)] = v;
        for (int v = kVocab - 1; v > 0; --v) {
            std::swap(perm[static_cast<std::size_t>(v)],
                      perm[next_below(rng, static_cast<std::uint64_t>(v) + 1)]);
        }
        std::vector<int> gen = random_tokens(rng, 1, 15, kVocab);
        std::vector<int> ref = random_tokens(rng, 1, 15, kVocab);
        const double before = bleu(gen, ref);
        for (int& t : gen) t = perm[static_cast<std::size_t>(t)];
        for (int& t : ref) t = perm[static_cast<std::size_t>(t)];
        CHECK(bleu(gen, ref) == before);
    }
}

TEST_CASE("empty reference is a precondition error") {
    const std::vector<int> gen = {1};
    CHECK_THROWS_AS(rouge1(gen, std::vector<int>{}), PreconditionError);
    CHECK_THROWS_AS(bleu(gen, std::vector<int>{}), PreconditionError);
    CHECK_THROWS_AS(bleu(gen, gen, 0), PreconditionError);
}

TEST_CASE("metric tokenization lowercases and splits on whitespace") {
    CHECK(metric_tokens("The cat  sat.\n on\tThe MAT") ==
          std::vector<std::string>{"the", "cat", "sat.", "on", "the", "mat"});
    CHECK(metric_tokens("").empty());
    CHECK(metric_tokens("   \t\n ").empty());
}
