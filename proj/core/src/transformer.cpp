#include "cled/transformer.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>

#include <nlohmann/json.hpp>

#include "cled/rng.hpp"

namespace cled {

std::string to_string(Variant v) {
    return v == Variant::opus ? "opus" : "t5";
}

Variant variant_from_string(const std::string& name) {
    if (name == "opus") return Variant::opus;
    if (name == "t5") return Variant::t5;
    throw DataError("unknown model variant: " + name);
}

void ModelConfig::validate() const {
    if (num_layers < 1) throw PreconditionError("num_layers must be >= 1");
    if (num_heads < 1) throw PreconditionError("num_heads must be >= 1");
    if (embed_dim < 1) throw PreconditionError("embed_dim must be >= 1");
    if (embed_dim % num_heads != 0) {
        throw PreconditionError("embed_dim must be divisible by num_heads");
    }
    if (vocab_size < 4) throw PreconditionError("vocab_size must be >= 4 (pad/bos/eos/unk)");
    if (max_seq_len < 1) throw PreconditionError("max_seq_len must be >= 1");
}

ModelConfig ModelConfig::toy(Variant variant, std::uint64_t seed) {
    ModelConfig cfg;
    cfg.variant = variant;
    cfg.num_layers = 2;
    cfg.num_heads = 2;
    cfg.embed_dim = 16;
    cfg.vocab_size = 32;
    cfg.max_seq_len = 20;
    cfg.seed = seed;
    return cfg;
}

float gelu(float x) {
    const float inner = 0.7978845608f * (x + 0.044715f * x * x * x);
    return 0.5f * x * (1.0f + std::tanh(inner));
}

void layer_norm(std::span<const float> x, std::span<const float> scale,
                std::span<const float> bias, std::span<float> out) {
    const int n = static_cast<int>(x.size());
    float mean = 0.0f;
    for (float v : x) mean += v;
    mean /= static_cast<float>(n);
    float var = 0.0f;
    for (float v : x) {
        const float d = v - mean;
        var += d * d;
    }
    var /= static_cast<float>(n);
    const float inv = 1.0f / std::sqrt(var + kLayerNormEps);
    for (int i = 0; i < n; ++i) {
        float v = (x[i] - mean) * inv * scale[i];
        if (!bias.empty()) v += bias[i];
        out[i] = v;
    }
}

// ---------------------------------------------------------------------------
// Layout
//
// Flat index order (the dump-file contract):
//   token_embedding [vocab x W]
//   position_embedding [max_seq_len x W]            (opus only)
//   encoder layer 0..N-1, then decoder layer 0..N-1, each laid out as
//     norm_sa.scale (.bias)            (bias: opus only, here and below)
//     self_attn.wq (.bq) .wk (.bk) .wv (.bv) .wo (.bo) (.rel_bias: t5 self)
//     [decoder] norm_ca.scale (.bias)
//     [decoder] cross_attn.wq (.bq) .wk (.bk) .wv (.bv) .wo (.bo)
//     norm_ff.scale (.bias)
//     ff.w1 (.b1) .w2 (.b2) (.wo: t5 only)
//   prediction [vocab x W]
//
// qkv matrices are packed per head: row block [h*d_h, (h+1)*d_h) is head h.
// ---------------------------------------------------------------------------

std::size_t MiniTransformer::add_entry(std::string name, ParamKind kind, int rows, int cols) {
    ParamEntry e;
    e.name = std::move(name);
    e.kind = kind;
    e.offset = arena_.size();
    e.rows = rows;
    e.cols = cols;
    arena_.resize(arena_.size() + e.size(), 0.0f);
    entries_.push_back(e);
    return e.offset;
}

MiniTransformer::AttnRefs MiniTransformer::add_attention(const std::string& prefix,
                                                         bool with_rel) {
    const int w = config_.embed_dim;
    const bool bias = config_.variant == Variant::opus;
    AttnRefs a;
    a.has_bias = bias;
    a.wq = add_entry(prefix + ".wq", ParamKind::weight, w, w);
    if (bias) a.bq = add_entry(prefix + ".bq", ParamKind::bias, 1, w);
    a.wk = add_entry(prefix + ".wk", ParamKind::weight, w, w);
    if (bias) a.bk = add_entry(prefix + ".bk", ParamKind::bias, 1, w);
    a.wv = add_entry(prefix + ".wv", ParamKind::weight, w, w);
    if (bias) a.bv = add_entry(prefix + ".bv", ParamKind::bias, 1, w);
    a.wo = add_entry(prefix + ".wo", ParamKind::weight, w, w);
    if (bias) a.bo = add_entry(prefix + ".bo", ParamKind::bias, 1, w);
    if (with_rel && config_.variant == Variant::t5) {
        a.has_rel = true;
        a.rel = add_entry(prefix + ".rel_bias", ParamKind::rel_bias_table, config_.num_heads,
                          2 * kRelClip + 1);
    }
    return a;
}

MiniTransformer::NormRefs MiniTransformer::add_norm(const std::string& prefix) {
    NormRefs n;
    n.scale = add_entry(prefix + ".scale", ParamKind::norm_scale, 1, config_.embed_dim);
    if (config_.variant == Variant::opus) {
        n.has_bias = true;
        n.bias = add_entry(prefix + ".bias", ParamKind::norm_bias, 1, config_.embed_dim);
    }
    return n;
}

MiniTransformer::FfRefs MiniTransformer::add_ff(const std::string& prefix) {
    const int w = config_.embed_dim;
    const int f = config_.ff_dim();
    FfRefs ff;
    if (config_.variant == Variant::opus) {
        ff.has_bias = true;
        ff.w1 = add_entry(prefix + ".w1", ParamKind::weight, f, w);
        ff.b1 = add_entry(prefix + ".b1", ParamKind::bias, 1, f);
        ff.w2 = add_entry(prefix + ".w2", ParamKind::weight, w, f);
        ff.b2 = add_entry(prefix + ".b2", ParamKind::bias, 1, w);
    } else {
        ff.gated = true;
        ff.w1 = add_entry(prefix + ".w1", ParamKind::weight, f, w);
        ff.w2 = add_entry(prefix + ".w2_gate", ParamKind::weight, f, w);
        ff.wo = add_entry(prefix + ".wo", ParamKind::weight, w, f);
    }
    return ff;
}

MiniTransformer::LayerRefs MiniTransformer::add_layer(const std::string& prefix, bool decoder) {
    LayerRefs layer;
    layer.norm_sa = add_norm(prefix + ".norm_sa");
    layer.self_attn = add_attention(prefix + ".self_attn", /*with_rel=*/true);
    if (decoder) {
        layer.has_cross = true;
        layer.norm_ca = add_norm(prefix + ".norm_ca");
        layer.cross_attn = add_attention(prefix + ".cross_attn", /*with_rel=*/false);
    }
    layer.norm_ff = add_norm(prefix + ".norm_ff");
    layer.ff = add_ff(prefix + ".ff");
    return layer;
}

void MiniTransformer::build_layout() {
    token_embedding_ =
        add_entry("token_embedding", ParamKind::weight, config_.vocab_size, config_.embed_dim);
    if (config_.variant == Variant::opus) {
        position_embedding_ = add_entry("position_embedding", ParamKind::weight,
                                        config_.max_seq_len, config_.embed_dim);
    }
    enc_begin_ = arena_.size();
    for (int i = 0; i < config_.num_layers; ++i) {
        encoder_.push_back(add_layer("encoder." + std::to_string(i), /*decoder=*/false));
    }
    dec_begin_ = arena_.size();
    for (int i = 0; i < config_.num_layers; ++i) {
        decoder_.push_back(add_layer("decoder." + std::to_string(i), /*decoder=*/true));
    }
    pred_begin_ = arena_.size();
    prediction_ = add_entry("prediction", ParamKind::weight, config_.vocab_size, config_.embed_dim);
}

void MiniTransformer::init_params() {
    // Weight matrices, embeddings and relative-bias tables draw from a
    // seeded N(0, 0.02^2); norm scales start at 1 and all bias vectors at 0,
    // mirroring trained-model statistics. Constant-initialized tensors do
    // not consume Gaussian draws.
    GaussianSource gauss(config_.seed);
    for (const ParamEntry& e : entries_) {
        float* dst = arena_.data() + e.offset;
        switch (e.kind) {
            case ParamKind::weight:
            case ParamKind::rel_bias_table:
                for (std::size_t i = 0; i < e.size(); ++i) {
                    dst[i] = static_cast<float>(gauss.next() * 0.02);
                }
                break;
            case ParamKind::norm_scale:
                std::fill(dst, dst + e.size(), 1.0f);
                break;
            case ParamKind::bias:
            case ParamKind::norm_bias:
                std::fill(dst, dst + e.size(), 0.0f);
                break;
        }
    }
}

MiniTransformer::MiniTransformer(const ModelConfig& config) : config_(config) {
    config_.validate();
    build_layout();
    init_params();
}

float MiniTransformer::get_param(std::size_t flat_index) const {
    if (flat_index >= arena_.size()) {
        throw PreconditionError("parameter index " + std::to_string(flat_index) +
                                " out of range (count " + std::to_string(arena_.size()) + ")");
    }
    return arena_[flat_index];
}

void MiniTransformer::set_param(std::size_t flat_index, float value) {
    if (flat_index >= arena_.size()) {
        throw PreconditionError("parameter index " + std::to_string(flat_index) +
                                " out of range (count " + std::to_string(arena_.size()) + ")");
    }
    arena_[flat_index] = value;
}

ParamSection MiniTransformer::section_of(std::size_t flat_index) const {
    if (flat_index >= arena_.size()) {
        throw PreconditionError("parameter index out of range");
    }
    if (flat_index >= pred_begin_) return ParamSection::prediction;
    if (flat_index >= dec_begin_) return ParamSection::decoder;
    if (flat_index >= enc_begin_) return ParamSection::encoder;
    const std::size_t tok_size =
        static_cast<std::size_t>(config_.vocab_size) * config_.embed_dim;
    if (flat_index < tok_size) return ParamSection::token_embedding;
    return ParamSection::position_embedding;
}

int MiniTransformer::embedding_row_of(std::size_t flat_index) const {
    const std::size_t tok_size =
        static_cast<std::size_t>(config_.vocab_size) * config_.embed_dim;
    if (flat_index >= tok_size) return -1;
    return static_cast<int>(flat_index / config_.embed_dim);
}

// ---------------------------------------------------------------------------
// Forward pieces
// ---------------------------------------------------------------------------

void MiniTransformer::check_tokens(const std::vector<int>& tokens) const {
    if (static_cast<int>(tokens.size()) > config_.max_seq_len) {
        throw PreconditionError("input length " + std::to_string(tokens.size()) +
                                " exceeds max_seq_len " + std::to_string(config_.max_seq_len));
    }
    for (int t : tokens) {
        if (t < 0 || t >= config_.vocab_size) {
            throw PreconditionError("token id " + std::to_string(t) + " outside vocabulary of " +
                                    std::to_string(config_.vocab_size));
        }
    }
}

Mat MiniTransformer::embed(const std::vector<int>& tokens, bool decoder_side) const {
    const int w = config_.embed_dim;
    Mat x(static_cast<int>(tokens.size()), w);
    const float* tok = ptr(token_embedding_);
    for (int i = 0; i < x.rows; ++i) {
        const float* src = tok + static_cast<std::size_t>(tokens[i]) * w;
        std::copy(src, src + w, x.row(i));
        if (config_.variant == Variant::opus) {
            const float* pos = ptr(position_embedding_) + static_cast<std::size_t>(i) * w;
            float* dst = x.row(i);
            for (int c = 0; c < w; ++c) dst[c] += pos[c];
        }
    }
    (void)decoder_side;
    return x;
}

void MiniTransformer::project_heads(const Mat& x, std::size_t w_off, std::size_t b_off,
                                    bool has_bias, Mat& out) const {
    const int w = config_.embed_dim;
    const float* wm = ptr(w_off);
    const float* bias = has_bias ? ptr(b_off) : nullptr;
    out = Mat(x.rows, w);
    for (int i = 0; i < x.rows; ++i) {
        const float* xi = x.row(i);
        float* oi = out.row(i);
        for (int r = 0; r < w; ++r) {
            const float* wr = wm + static_cast<std::size_t>(r) * w;
            float acc = 0.0f;
            for (int c = 0; c < w; ++c) acc += xi[c] * wr[c];
            if (bias) acc += bias[r];
            oi[r] = acc;
        }
    }
}

// Attention of one query row over keys/values rows [0, causal_limit].
// rel_table, when non-null, points at the per-head relative bias table
// (num_heads rows of 2*kRelClip+1); the bias for key j is looked up at the
// clipped distance j - query_pos.
void MiniTransformer::attend_row(const float* q_row, const Mat& keys, const Mat& values,
                                 int causal_limit, const float* rel_table, int query_pos,
                                 float* out) const {
    const int heads = config_.num_heads;
    const int dh = config_.head_dim();
    const int nkeys = causal_limit + 1;
    std::vector<float> scores(static_cast<std::size_t>(nkeys));
    for (int h = 0; h < heads; ++h) {
        const int base = h * dh;
        for (int j = 0; j < nkeys; ++j) {
            const float* kj = keys.row(j) + base;
            const float* qh = q_row + base;
            float s = 0.0f;
            for (int d = 0; d < dh; ++d) s += qh[d] * kj[d];
            if (rel_table) {
                int dist = j - query_pos;
                dist = std::clamp(dist, -kRelClip, kRelClip);
                s += rel_table[static_cast<std::size_t>(h) * (2 * kRelClip + 1) +
                               (dist + kRelClip)];
            }
            scores[j] = s;
        }
        float maxv = scores[0];
        for (int j = 1; j < nkeys; ++j) {
            if (scores[j] > maxv) maxv = scores[j];
        }
        float sum = 0.0f;
        for (int j = 0; j < nkeys; ++j) {
            scores[j] = std::exp(scores[j] - maxv);
            sum += scores[j];
        }
        for (int d = 0; d < dh; ++d) {
            float acc = 0.0f;
            for (int j = 0; j < nkeys; ++j) {
                acc += (scores[j] / sum) * values.at(j, base + d);
            }
            out[base + d] = acc;
        }
    }
}

Mat MiniTransformer::attention_impl(const Mat& q_in, const Mat& kv_in, const AttnRefs& w,
                                    bool causal) const {
    Mat q, k, v;
    project_heads(q_in, w.wq, w.bq, w.has_bias, q);
    project_heads(kv_in, w.wk, w.bk, w.has_bias, k);
    project_heads(kv_in, w.wv, w.bv, w.has_bias, v);

    const int wdim = config_.embed_dim;
    const float* rel = w.has_rel ? ptr(w.rel) : nullptr;
    Mat mixed(q.rows, wdim);
    for (int i = 0; i < q.rows; ++i) {
        const int limit = causal ? std::min(i, k.rows - 1) : k.rows - 1;
        attend_row(q.row(i), k, v, limit, rel, i, mixed.row(i));
    }

    Mat out;
    project_heads(mixed, w.wo, w.bo, w.has_bias, out);
    return out;
}

Mat MiniTransformer::ff_impl(const Mat& y, const FfRefs& w) const {
    const int wdim = config_.embed_dim;
    const int fdim = config_.ff_dim();
    Mat out(y.rows, wdim);
    const float* w1 = ptr(w.w1);
    const float* w2 = ptr(w.w2);
    std::vector<float> hidden(static_cast<std::size_t>(fdim));
    for (int i = 0; i < y.rows; ++i) {
        const float* yi = y.row(i);
        if (w.gated) {
            const float* wo = ptr(w.wo);
            for (int r = 0; r < fdim; ++r) {
                const float* a = w1 + static_cast<std::size_t>(r) * wdim;
                const float* g = w2 + static_cast<std::size_t>(r) * wdim;
                float acca = 0.0f;
                float accg = 0.0f;
                for (int c = 0; c < wdim; ++c) {
                    acca += yi[c] * a[c];
                    accg += yi[c] * g[c];
                }
                hidden[r] = gelu(acca) * accg;
            }
            for (int r = 0; r < wdim; ++r) {
                const float* wr = wo + static_cast<std::size_t>(r) * fdim;
                float acc = 0.0f;
                for (int c = 0; c < fdim; ++c) acc += hidden[c] * wr[c];
                out.at(i, r) = acc;
            }
        } else {
            const float* b1 = ptr(w.b1);
            const float* b2 = ptr(w.b2);
            for (int r = 0; r < fdim; ++r) {
                const float* wr = w1 + static_cast<std::size_t>(r) * wdim;
                float acc = 0.0f;
                for (int c = 0; c < wdim; ++c) acc += yi[c] * wr[c];
                hidden[r] = gelu(acc + b1[r]);
            }
            for (int r = 0; r < wdim; ++r) {
                const float* wr = w2 + static_cast<std::size_t>(r) * fdim;
                float acc = 0.0f;
                for (int c = 0; c < fdim; ++c) acc += hidden[c] * wr[c];
                out.at(i, r) = acc + b2[r];
            }
        }
    }
    return out;
}

std::span<const float> MiniTransformer::span_of(const NormRefs& n, bool bias) const {
    if (bias && !n.has_bias) return {};
    return {ptr(bias ? n.bias : n.scale), static_cast<std::size_t>(config_.embed_dim)};
}

Mat MiniTransformer::encoder_layer_forward(const Mat& x, const LayerRefs& layer) const {
    const int w = config_.embed_dim;
    Mat cur = x;
    if (config_.variant == Variant::t5) {
        Mat normed(cur.rows, w);
        for (int i = 0; i < cur.rows; ++i) {
            layer_norm({cur.row(i), static_cast<std::size_t>(w)}, span_of(layer.norm_sa, false),
                       span_of(layer.norm_sa, true), {normed.row(i), static_cast<std::size_t>(w)});
        }
        Mat sa = attention_impl(normed, normed, layer.self_attn, /*causal=*/false);
        for (std::size_t i = 0; i < cur.data.size(); ++i) cur.data[i] += sa.data[i];

        Mat normed2(cur.rows, w);
        for (int i = 0; i < cur.rows; ++i) {
            layer_norm({cur.row(i), static_cast<std::size_t>(w)}, span_of(layer.norm_ff, false),
                       span_of(layer.norm_ff, true), {normed2.row(i), static_cast<std::size_t>(w)});
        }
        Mat ff = ff_impl(normed2, layer.ff);
        for (std::size_t i = 0; i < cur.data.size(); ++i) cur.data[i] += ff.data[i];
        return cur;
    }

    Mat sa = attention_impl(cur, cur, layer.self_attn, /*causal=*/false);
    for (std::size_t i = 0; i < cur.data.size(); ++i) cur.data[i] += sa.data[i];
    for (int i = 0; i < cur.rows; ++i) {
        layer_norm({cur.row(i), static_cast<std::size_t>(w)}, span_of(layer.norm_sa, false),
                   span_of(layer.norm_sa, true), {cur.row(i), static_cast<std::size_t>(w)});
    }
    Mat ff = ff_impl(cur, layer.ff);
    for (std::size_t i = 0; i < cur.data.size(); ++i) cur.data[i] += ff.data[i];
    for (int i = 0; i < cur.rows; ++i) {
        layer_norm({cur.row(i), static_cast<std::size_t>(w)}, span_of(layer.norm_ff, false),
                   span_of(layer.norm_ff, true), {cur.row(i), static_cast<std::size_t>(w)});
    }
    return cur;
}

Mat MiniTransformer::encode(const std::vector<int>& tokens) const {
    check_tokens(tokens);
    Mat x = embed(tokens, /*decoder_side=*/false);
    for (const LayerRefs& layer : encoder_) {
        x = encoder_layer_forward(x, layer);
    }
    return x;
}

Mat MiniTransformer::attention(const Mat& q_in, const Mat& kv_in, int layer, bool decoder,
                               bool cross, bool causal) const {
    const auto& layers = decoder ? decoder_ : encoder_;
    if (layer < 0 || layer >= static_cast<int>(layers.size())) {
        throw PreconditionError("layer index out of range");
    }
    if (cross && !decoder) {
        throw PreconditionError("encoder layers have no cross-attention");
    }
    const LayerRefs& refs = layers[layer];
    return attention_impl(q_in, kv_in, cross ? refs.cross_attn : refs.self_attn, causal);
}

Mat MiniTransformer::feed_forward(const Mat& y, int layer, bool decoder) const {
    const auto& layers = decoder ? decoder_ : encoder_;
    if (layer < 0 || layer >= static_cast<int>(layers.size())) {
        throw PreconditionError("layer index out of range");
    }
    return ff_impl(y, layers[layer].ff);
}

// ---------------------------------------------------------------------------
// Incremental greedy decoding
//
// Each decoder position is processed once; self-attention K/V rows are
// appended to a cache. Because layer norm, projections and the feed-forward
// act row-wise and self-attention of row t only reads rows <= t, this is
// bit-identical to re-running the whole prefix every step.
// ---------------------------------------------------------------------------

struct MiniTransformer::DecodeCache {
    const Mat* enc_out = nullptr;
    struct Layer {
        Mat self_k, self_v;
        Mat cross_k, cross_v;
        bool cross_ready = false;
    };
    std::vector<Layer> layers;
    int steps = 0;
};

namespace {
void append_row(Mat& m, const float* row, int cols) {
    m.cols = cols;
    m.data.insert(m.data.end(), row, row + cols);
    ++m.rows;
}
} // namespace

std::vector<float> MiniTransformer::decode_step(DecodeCache& cache, int token) const {
    const int w = config_.embed_dim;
    const int pos = cache.steps;

    std::vector<float> x(static_cast<std::size_t>(w));
    {
        const float* src = ptr(token_embedding_) + static_cast<std::size_t>(token) * w;
        std::copy(src, src + w, x.begin());
        if (config_.variant == Variant::opus) {
            const float* p = ptr(position_embedding_) + static_cast<std::size_t>(pos) * w;
            for (int c = 0; c < w; ++c) x[c] += p[c];
        }
    }

    Mat row(1, w);
    std::vector<float> normed(static_cast<std::size_t>(w));
    std::vector<float> sub(static_cast<std::size_t>(w));

    for (std::size_t li = 0; li < decoder_.size(); ++li) {
        const LayerRefs& layer = decoder_[li];
        DecodeCache::Layer& lc = cache.layers[li];
        const bool pre_norm = config_.variant == Variant::t5;

        // self-attention
        {
            const float* attn_in = x.data();
            if (pre_norm) {
                layer_norm(x, span_of(layer.norm_sa, false), span_of(layer.norm_sa, true), normed);
                attn_in = normed.data();
            }
            std::copy(attn_in, attn_in + w, row.row(0));
            Mat k1, v1, q1;
            project_heads(row, layer.self_attn.wk, layer.self_attn.bk, layer.self_attn.has_bias,
                          k1);
            project_heads(row, layer.self_attn.wv, layer.self_attn.bv, layer.self_attn.has_bias,
                          v1);
            append_row(lc.self_k, k1.row(0), w);
            append_row(lc.self_v, v1.row(0), w);
            project_heads(row, layer.self_attn.wq, layer.self_attn.bq, layer.self_attn.has_bias,
                          q1);
            const float* rel = layer.self_attn.has_rel ? ptr(layer.self_attn.rel) : nullptr;
            std::vector<float> mixed(static_cast<std::size_t>(w));
            attend_row(q1.row(0), lc.self_k, lc.self_v, pos, rel, pos, mixed.data());
            Mat mixed_m(1, w);
            std::copy(mixed.begin(), mixed.end(), mixed_m.row(0));
            Mat out;
            project_heads(mixed_m, layer.self_attn.wo, layer.self_attn.bo,
                          layer.self_attn.has_bias, out);
            for (int c = 0; c < w; ++c) sub[c] = out.at(0, c);
        }
        if (pre_norm) {
            for (int c = 0; c < w; ++c) x[c] += sub[c];
        } else {
            for (int c = 0; c < w; ++c) sub[c] += x[c];
            layer_norm(sub, span_of(layer.norm_sa, false), span_of(layer.norm_sa, true), x);
        }

        // cross-attention
        {
            if (!lc.cross_ready) {
                project_heads(*cache.enc_out, layer.cross_attn.wk, layer.cross_attn.bk,
                              layer.cross_attn.has_bias, lc.cross_k);
                project_heads(*cache.enc_out, layer.cross_attn.wv, layer.cross_attn.bv,
                              layer.cross_attn.has_bias, lc.cross_v);
                lc.cross_ready = true;
            }
            const float* attn_in = x.data();
            if (pre_norm) {
                layer_norm(x, span_of(layer.norm_ca, false), span_of(layer.norm_ca, true), normed);
                attn_in = normed.data();
            }
            std::copy(attn_in, attn_in + w, row.row(0));
            Mat q1;
            project_heads(row, layer.cross_attn.wq, layer.cross_attn.bq,
                          layer.cross_attn.has_bias, q1);
            std::vector<float> mixed(static_cast<std::size_t>(w));
            attend_row(q1.row(0), lc.cross_k, lc.cross_v, lc.cross_k.rows - 1, nullptr, 0,
                       mixed.data());
            Mat mixed_m(1, w);
            std::copy(mixed.begin(), mixed.end(), mixed_m.row(0));
            Mat out;
            project_heads(mixed_m, layer.cross_attn.wo, layer.cross_attn.bo,
                          layer.cross_attn.has_bias, out);
            for (int c = 0; c < w; ++c) sub[c] = out.at(0, c);
        }
        if (pre_norm) {
            for (int c = 0; c < w; ++c) x[c] += sub[c];
        } else {
            for (int c = 0; c < w; ++c) sub[c] += x[c];
            layer_norm(sub, span_of(layer.norm_ca, false), span_of(layer.norm_ca, true), x);
        }

        // feed-forward
        {
            const float* ff_in = x.data();
            if (pre_norm) {
                layer_norm(x, span_of(layer.norm_ff, false), span_of(layer.norm_ff, true), normed);
                ff_in = normed.data();
            }
            std::copy(ff_in, ff_in + w, row.row(0));
            Mat out = ff_impl(row, layer.ff);
            for (int c = 0; c < w; ++c) sub[c] = out.at(0, c);
        }
        if (pre_norm) {
            for (int c = 0; c < w; ++c) x[c] += sub[c];
        } else {
            for (int c = 0; c < w; ++c) sub[c] += x[c];
            layer_norm(sub, span_of(layer.norm_ff, false), span_of(layer.norm_ff, true), x);
        }
    }

    ++cache.steps;

    std::vector<float> logits(static_cast<std::size_t>(config_.vocab_size));
    const float* pred = ptr(prediction_);
    for (int v = 0; v < config_.vocab_size; ++v) {
        const float* pv = pred + static_cast<std::size_t>(v) * w;
        float acc = 0.0f;
        for (int c = 0; c < w; ++c) acc += pv[c] * x[c];
        logits[v] = acc;
    }
    return logits;
}

std::vector<int> MiniTransformer::generate_with_encoded(const Mat& enc_out, int max_len) const {
    if (max_len < 0) throw PreconditionError("max_len must be >= 0");
    if (enc_out.rows == 0) throw PreconditionError("generate requires a non-empty input");

    DecodeCache cache;
    cache.enc_out = &enc_out;
    cache.layers.resize(decoder_.size());

    std::vector<int> out;
    int token = special_tokens::kBos;
    for (int step = 0; step < max_len; ++step) {
        if (cache.steps >= config_.max_seq_len) break;
        const std::vector<float> logits = decode_step(cache, token);
        int best = 0;
        float best_val = logits[0];
        for (int v = 1; v < config_.vocab_size; ++v) {
            if (logits[v] > best_val) {
                best_val = logits[v];
                best = v;
            }
        }
        if (best == special_tokens::kEos) break;
        out.push_back(best);
        token = best;
    }
    return out;
}

std::vector<int> MiniTransformer::generate(const std::vector<int>& tokens, int max_len) const {
    if (tokens.empty()) throw PreconditionError("generate requires a non-empty input");
    const Mat enc_out = encode(tokens);
    return generate_with_encoded(enc_out, max_len);
}

// ---------------------------------------------------------------------------
// Persistence
// ---------------------------------------------------------------------------

namespace {
nlohmann::json config_to_json(const ModelConfig& cfg) {
    return nlohmann::json{{"variant", to_string(cfg.variant)}, {"num_layers", cfg.num_layers},
                          {"num_heads", cfg.num_heads},        {"embed_dim", cfg.embed_dim},
                          {"vocab_size", cfg.vocab_size},      {"max_seq_len", cfg.max_seq_len},
                          {"seed", cfg.seed}};
}

ModelConfig config_from_json(const nlohmann::json& j) {
    ModelConfig cfg;
    cfg.variant = variant_from_string(j.at("variant").get<std::string>());
    cfg.num_layers = j.at("num_layers").get<int>();
    cfg.num_heads = j.at("num_heads").get<int>();
    cfg.embed_dim = j.at("embed_dim").get<int>();
    cfg.vocab_size = j.at("vocab_size").get<int>();
    cfg.max_seq_len = j.at("max_seq_len").get<int>();
    cfg.seed = j.at("seed").get<std::uint64_t>();
    return cfg;
}
} // namespace

std::vector<std::uint8_t> MiniTransformer::serialize() const {
    nlohmann::json header{{"format", "cled-params"},
                          {"version", 1},
                          {"config", config_to_json(config_)},
                          {"param_count", arena_.size()}};
    const std::string line = header.dump() + "\n";
    std::vector<std::uint8_t> bytes(line.begin(), line.end());
    bytes.reserve(bytes.size() + arena_.size() * 4);
    for (float v : arena_) {
        const std::uint32_t raw = std::bit_cast<std::uint32_t>(v);
        bytes.push_back(static_cast<std::uint8_t>(raw & 0xFF));
        bytes.push_back(static_cast<std::uint8_t>((raw >> 8) & 0xFF));
        bytes.push_back(static_cast<std::uint8_t>((raw >> 16) & 0xFF));
        bytes.push_back(static_cast<std::uint8_t>((raw >> 24) & 0xFF));
    }
    return bytes;
}

void MiniTransformer::save(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot open " + path.string() + " for writing");
    const auto bytes = serialize();
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out) throw DataError("write failed: " + path.string());
}

MiniTransformer MiniTransformer::load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open " + path.string());
    std::string line;
    if (!std::getline(in, line)) throw DataError("missing parameter-dump header: " + path.string());
    nlohmann::json header;
    try {
        header = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
        throw DataError("bad parameter-dump header in " + path.string() + ": " + e.what());
    }
    if (header.value("format", "") != "cled-params" || header.value("version", 0) != 1) {
        throw DataError("unsupported parameter-dump format in " + path.string());
    }
    MiniTransformer model(config_from_json(header.at("config")));
    const std::size_t count = header.at("param_count").get<std::size_t>();
    if (count != model.param_count()) {
        throw DataError("parameter count mismatch in " + path.string() + ": header says " +
                        std::to_string(count) + ", layout has " +
                        std::to_string(model.param_count()));
    }
    std::vector<std::uint8_t> raw(count * 4);
    in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
    if (static_cast<std::size_t>(in.gcount()) != raw.size()) {
        throw DataError("truncated parameter dump: " + path.string());
    }
    for (std::size_t i = 0; i < count; ++i) {
        const std::uint32_t bits = static_cast<std::uint32_t>(raw[i * 4]) |
                                   (static_cast<std::uint32_t>(raw[i * 4 + 1]) << 8) |
                                   (static_cast<std::uint32_t>(raw[i * 4 + 2]) << 16) |
                                   (static_cast<std::uint32_t>(raw[i * 4 + 3]) << 24);
        model.arena_[i] = std::bit_cast<float>(bits);
    }
    return model;
}

// ---------------------------------------------------------------------------
// Toy vocabulary and inputs
// ---------------------------------------------------------------------------

ToyVocab::ToyVocab()
    : ToyVocab(std::vector<std::string>{
          "<pad>", "<s>",   "</s>",  "<unk>",  "the",   "a",     "of",    "to",
          "and",   "in",    "was",   "is",     "for",   "on",    "that",  "with",
          "he",    "she",   "it",    "they",   "court", "city",  "river", "treaty",
          "signed", "moved", "found", "held",  "new",   "old",   "very",  "never"}) {}

ToyVocab::ToyVocab(std::vector<std::string> words) : words_(std::move(words)) {
    if (words_.size() < 4) {
        throw PreconditionError("vocabulary needs at least the 4 reserved entries");
    }
}

const std::string& ToyVocab::word(int id) const {
    if (id < 0 || id >= size()) {
        throw PreconditionError("token id " + std::to_string(id) + " outside vocabulary");
    }
    return words_[static_cast<std::size_t>(id)];
}

int ToyVocab::id_of(const std::string& w) const {
    for (int i = 0; i < size(); ++i) {
        if (words_[static_cast<std::size_t>(i)] == w) return i;
    }
    return special_tokens::kUnk;
}

std::vector<int> ToyVocab::encode(const std::string& text) const {
    std::vector<int> ids;
    std::string cur;
    auto flush = [&] {
        if (!cur.empty()) {
            ids.push_back(id_of(cur));
            cur.clear();
        }
    };
    for (char ch : text) {
        if (ch == ' ' || ch == '\t' || ch == '\n' || ch == '\r') {
            flush();
        } else {
            cur.push_back(ch);
        }
    }
    flush();
    return ids;
}

std::string ToyVocab::decode(const std::vector<int>& ids) const {
    std::string text;
    for (int id : ids) {
        if (!text.empty()) text.push_back(' ');
        text += word(id);
    }
    return text;
}

std::vector<std::vector<int>> make_toy_inputs(const ModelConfig& config, int count,
                                              std::uint64_t seed) {
    if (count < 1) throw PreconditionError("input count must be >= 1");
    if (config.vocab_size <= 4) {
        throw PreconditionError("toy inputs need a vocabulary beyond the reserved tokens");
    }
    Rng rng(derive_seed(seed, 0x7071));
    const int min_len = std::min(4, config.max_seq_len);
    const int max_len = std::min(12, config.max_seq_len);
    std::vector<std::vector<int>> inputs;
    inputs.reserve(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) {
        const int len =
            min_len + static_cast<int>(next_below(rng, static_cast<std::uint64_t>(
                                                           max_len - min_len + 1)));
        std::vector<int> seq(static_cast<std::size_t>(len));
        for (int& t : seq) {
            t = 4 + static_cast<int>(next_below(rng, static_cast<std::uint64_t>(
                                                         config.vocab_size - 4)));
        }
        inputs.push_back(std::move(seq));
    }
    return inputs;
}

} // namespace cled
