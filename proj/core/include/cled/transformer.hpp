#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "cled/errors.hpp"

namespace cled {

// Two miniature encoder-decoder wirings that mirror the architectural split
// found in production translation models:
//   opus: post-layer-norm, bias vectors everywhere, learned absolute position
//         embeddings, 2-matrix GeLU feed-forward.
//   t5:   pre-layer-norm (scale only, no bias anywhere), no position
//         embeddings; self-attention adds a learned per-head relative
//         position bias, and the feed-forward is gated (3 matrices).
// Attention scores are plain dot products -- no 1/sqrt(d_h) scaling -- and
// every arithmetic step stays in float32 so that injected Inf/NaN values
// propagate exactly as they would in a 32-bit inference engine.
enum class Variant { opus, t5 };

std::string to_string(Variant v);
Variant variant_from_string(const std::string& name);

namespace special_tokens {
inline constexpr int kPad = 0;
inline constexpr int kBos = 1;
inline constexpr int kEos = 2;
inline constexpr int kUnk = 3;
} // namespace special_tokens

// Relative distances beyond +/-kRelClip share the edge bucket, so the bias
// table has 2*kRelClip+1 columns per head.
inline constexpr int kRelClip = 8;
inline constexpr float kLayerNormEps = 1e-6f;

struct ModelConfig {
    Variant variant = Variant::t5;
    int num_layers = 2;
    int num_heads = 2;
    int embed_dim = 16;
    int vocab_size = 32;
    int max_seq_len = 20;
    std::uint64_t seed = 1;

    int head_dim() const { return embed_dim / num_heads; }
    int ff_dim() const { return 4 * embed_dim; }
    void validate() const;
    static ModelConfig toy(Variant variant, std::uint64_t seed);
};

// Dense row-major float32 matrix. Deliberately minimal: the point of this
// code is auditable arithmetic, not speed.
struct Mat {
    int rows = 0;
    int cols = 0;
    std::vector<float> data;

    Mat() = default;
    Mat(int r, int c) : rows(r), cols(c), data(static_cast<std::size_t>(r) * c, 0.0f) {}

    float* row(int r) { return data.data() + static_cast<std::size_t>(r) * cols; }
    const float* row(int r) const { return data.data() + static_cast<std::size_t>(r) * cols; }
    float& at(int r, int c) { return data[static_cast<std::size_t>(r) * cols + c]; }
    float at(int r, int c) const { return data[static_cast<std::size_t>(r) * cols + c]; }
};

enum class ParamKind { weight, bias, norm_scale, norm_bias, rel_bias_table };

struct ParamEntry {
    std::string name;
    ParamKind kind = ParamKind::weight;
    std::size_t offset = 0;
    int rows = 0;
    int cols = 0;

    std::size_t size() const { return static_cast<std::size_t>(rows) * cols; }
    bool is_bias() const { return kind == ParamKind::bias || kind == ParamKind::norm_bias; }
};

// Coarse location of a flat parameter index; used to decide which parts of
// the forward pass a perturbation can reach (e.g. encoder output reuse).
enum class ParamSection { token_embedding, position_embedding, encoder, decoder, prediction };

float gelu(float x);

// (x - mean) / sqrt(var + eps) * scale (+ bias). All float32; `bias` may be
// empty for scale-only normalization. `out` may alias `x`.
void layer_norm(std::span<const float> x, std::span<const float> scale,
                std::span<const float> bias, std::span<float> out);

// Greedy encoder-decoder model over one flat float32 parameter arena.
// Registration order of the named tensors defines the flat-index contract;
// see the layout comment in the implementation file. All parameters are
// reachable through get_param/set_param by flat index, which is what the
// fault-injection campaign perturbs.
class MiniTransformer {
public:
    explicit MiniTransformer(const ModelConfig& config);

    const ModelConfig& config() const { return config_; }

    std::size_t param_count() const { return arena_.size(); }
    float get_param(std::size_t flat_index) const;
    void set_param(std::size_t flat_index, float value);
    std::span<const float> params() const { return {arena_.data(), arena_.size()}; }
    const std::vector<ParamEntry>& param_entries() const { return entries_; }

    ParamSection section_of(std::size_t flat_index) const;
    // Row of the token-embedding table this index falls in, or -1.
    int embedding_row_of(std::size_t flat_index) const;

    // Full encoder stack over a token sequence; rows are positions.
    Mat encode(const std::vector<int>& tokens) const;

    // Greedy decode: starts from <s>, stops at </s> or after max_len tokens
    // (or when the decoder runs out of positions). Returned ids exclude both
    // sentinels. Uses an incremental K/V cache that is bit-identical to
    // recomputing the whole prefix each step.
    std::vector<int> generate(const std::vector<int>& tokens, int max_len) const;
    std::vector<int> generate_with_encoded(const Mat& enc_out, int max_len) const;

    // Single attention / feed-forward blocks exposed for oracle comparison
    // in tests. `layer` indexes into the chosen stack.
    Mat attention(const Mat& q_in, const Mat& kv_in, int layer, bool decoder, bool cross,
                  bool causal) const;
    Mat feed_forward(const Mat& y, int layer, bool decoder) const;

    // Dump format: one-line JSON header, then the arena as raw little-endian
    // float32 (bit-exact round trip, NaN payloads included).
    void save(const std::filesystem::path& path) const;
    static MiniTransformer load(const std::filesystem::path& path);
    std::vector<std::uint8_t> serialize() const;

private:
    struct AttnRefs {
        std::size_t wq = 0, bq = 0, wk = 0, bk = 0, wv = 0, bv = 0, wo = 0, bo = 0, rel = 0;
        bool has_bias = false;
        bool has_rel = false;
    };
    struct NormRefs {
        std::size_t scale = 0, bias = 0;
        bool has_bias = false;
    };
    struct FfRefs {
        std::size_t w1 = 0, b1 = 0, w2 = 0, b2 = 0, wo = 0;
        bool has_bias = false;
        bool gated = false;
    };
    struct LayerRefs {
        NormRefs norm_sa, norm_ca, norm_ff;
        AttnRefs self_attn, cross_attn;
        FfRefs ff;
        bool has_cross = false;
    };
    struct DecodeCache;

    std::size_t add_entry(std::string name, ParamKind kind, int rows, int cols);
    AttnRefs add_attention(const std::string& prefix, bool with_rel);
    NormRefs add_norm(const std::string& prefix);
    FfRefs add_ff(const std::string& prefix);
    LayerRefs add_layer(const std::string& prefix, bool decoder);
    void build_layout();
    void init_params();

    const float* ptr(std::size_t offset) const { return arena_.data() + offset; }
    std::span<const float> span_of(const NormRefs& n, bool bias) const;

    void check_tokens(const std::vector<int>& tokens) const;
    Mat embed(const std::vector<int>& tokens, bool decoder_side) const;
    void project_heads(const Mat& x, std::size_t w_off, std::size_t b_off, bool has_bias,
                       Mat& out) const;
    void attend_row(const float* q_row, const Mat& keys, const Mat& values, int causal_limit,
                    const float* rel_table, int query_pos, float* out) const;
    Mat attention_impl(const Mat& q_in, const Mat& kv_in, const AttnRefs& w, bool causal) const;
    Mat ff_impl(const Mat& y, const FfRefs& w) const;
    Mat encoder_layer_forward(const Mat& x, const LayerRefs& layer) const;
    std::vector<float> decode_step(DecodeCache& cache, int token) const;

    ModelConfig config_;
    std::vector<float> arena_;
    std::vector<ParamEntry> entries_;
    std::vector<LayerRefs> encoder_;
    std::vector<LayerRefs> decoder_;
    std::size_t token_embedding_ = 0;
    std::size_t position_embedding_ = 0;
    std::size_t prediction_ = 0;
    std::size_t enc_begin_ = 0;
    std::size_t dec_begin_ = 0;
    std::size_t pred_begin_ = 0;
};

// 32-entry word list (4 reserved + 28 plain English words) used by the
// demonstration pipeline to turn token ids into text for scoring.
class ToyVocab {
public:
    ToyVocab();
    explicit ToyVocab(std::vector<std::string> words);

    int size() const { return static_cast<int>(words_.size()); }
    const std::string& word(int id) const;
    int id_of(const std::string& w) const;
    std::vector<int> encode(const std::string& text) const;
    std::string decode(const std::vector<int>& ids) const;

private:
    std::vector<std::string> words_;
};

// Seeded random token sequences (non-reserved ids, lengths 4..12 clipped to
// max_seq_len) for fault-injection sweeps.
std::vector<std::vector<int>> make_toy_inputs(const ModelConfig& config, int count,
                                              std::uint64_t seed);

} // namespace cled
