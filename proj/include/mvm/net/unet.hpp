#pragma once

#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "mvm/net/layers.hpp"
#include "mvm/rng.hpp"
#include "mvm/sampling.hpp"

namespace mvm::net {

/// Architecture toggles; the four ablation rows are combinations of these.
struct NetworkConfig {
    int base_channels = 16;
    int depth = 4;  // pooling stages; a HxW input reaches H/16 x W/16
    bool independent_encoders = true;
    bool independent_decoders = true;
    bool shared_bottleneck = true;
    bool use_attention = true;

    bool operator==(const NetworkConfig&) const = default;
};

enum class AblationRow { sep_no_shared, shared_no_independent, no_weighted_loss, full };

/// Network inputs assembled from one SynthesisSample: channel-planar stacks
/// plus the condition map and the synthesis residual bases in preimage
/// (logit / atanh) form.
template <typename S>
struct NetInputs {
    Tensor<S> mag;        // 2 x H x W
    Tensor<S> phase;      // 6 x H x W
    Tensor<S> mask;       // 2 x H x W
    Tensor<S> condition;  // 2 x 32 x 32
    Tensor<S> mag_base_logit;    // 1 x H x W
    Tensor<S> phase_base_atanh;  // 3 x H x W
};

template <typename S>
struct NetOutputs {
    Tensor<S> mag_pred;    // sigmoid head + interpolation residual, in [0,1]
    Tensor<S> phase_pred;  // tanh head + interpolation residual, in [-1,1]
    Tensor<S> mask_prob;   // sigmoid head, in [0,1]
};

namespace detail {

inline double squash_preimage_logit(double v) {
    const double b = std::clamp(v, 1e-7, 1.0 - 1e-7);
    return std::log(b / (1.0 - b));
}

inline double squash_preimage_atanh(double v) {
    const double b = std::clamp(v, -1.0 + 1e-7, 1.0 - 1e-7);
    return std::atanh(b);
}

}  // namespace detail

template <typename S>
NetInputs<S> make_net_inputs(const SynthesisSample& sample) {
    const Index h = sample.mag_in[0].rows(), w = sample.mag_in[0].cols();
    NetInputs<S> in;
    in.mag = Tensor<S>(2, h, w);
    in.phase = Tensor<S>(6, h, w);
    in.mask = Tensor<S>(2, h, w);
    for (int i = 0; i < 2; ++i) in.mag.set_plane(i, sample.mag_in[static_cast<size_t>(i)]);
    for (int i = 0; i < 6; ++i) in.phase.set_plane(i, sample.phase_in[static_cast<size_t>(i)]);
    for (int i = 0; i < 2; ++i) in.mask.set_plane(i, sample.mask_in[static_cast<size_t>(i)]);
    in.condition = Tensor<S>(2, kConditionSize, kConditionSize);
    in.condition.set_plane(0, sample.condition.ch0);
    in.condition.set_plane(1, sample.condition.ch1);

    in.mag_base_logit = Tensor<S>(1, h, w);
    in.phase_base_atanh = Tensor<S>(3, h, w);
    const ImageF mag_base = lerp_anchor(sample.mag_in[0], sample.mag_in[1], sample.k);
    for (Index y = 0; y < h; ++y)
        for (Index x = 0; x < w; ++x)
            in.mag_base_logit.plane(0)(y, x) =
                static_cast<S>(detail::squash_preimage_logit(mag_base(y, x)));
    for (int d = 0; d < 3; ++d) {
        const ImageF base = lerp_anchor(sample.phase_in[static_cast<size_t>(2 * d)],
                                        sample.phase_in[static_cast<size_t>(2 * d + 1)], sample.k);
        for (Index y = 0; y < h; ++y)
            for (Index x = 0; x < w; ++x)
                in.phase_base_atanh.plane(d)(y, x) =
                    static_cast<S>(detail::squash_preimage_atanh(base(y, x)));
    }
    return in;
}

/// Multi-head multi-tail attention UNet: up to three encoders (magnitude,
/// phase, mask), a condition-fused bottleneck (shared or per-thread), and up
/// to three decoders with attention-gated skips and interpolation-residual
/// synthesis heads.
template <typename S>
class MTAttentionUNet {
public:
    using Mat = typename Tensor<S>::Mat;

    explicit MTAttentionUNet(const NetworkConfig& cfg, uint64_t init_seed = 42) : cfg_(cfg) {
        if (cfg.depth != 4) throw ArgumentError("network depth is fixed at 4");
        if (cfg.base_channels < 1) throw ArgumentError("base_channels must be >= 1");
        build();
        init_params(init_seed);
    }

    const NetworkConfig& config() const { return cfg_; }
    int num_encoders() const { return cfg_.independent_encoders ? 3 : 1; }
    int num_decoders() const { return cfg_.independent_decoders ? 3 : 1; }

    NetOutputs<S> forward(const NetInputs<S>& in, NormStatsCollector* stats = nullptr) {
        check_input(in);

        // encoders
        std::vector<Tensor<S>> enc_in;
        if (cfg_.independent_encoders) {
            enc_in = {in.mag, in.phase, in.mask};
        } else {
            enc_in.push_back(concat_channels<S>({&in.mag, &in.phase, &in.mask}));
        }
        const int ne = num_encoders();
        skips_.assign(static_cast<size_t>(ne), {});
        bottoms_.resize(static_cast<size_t>(ne));
        for (int e = 0; e < ne; ++e) {
            Tensor<S> x = enc_in[static_cast<size_t>(e)];
            skips_[static_cast<size_t>(e)].resize(4);
            for (int i = 0; i < 4; ++i) {
                x = encoders_[static_cast<size_t>(e)].blocks[static_cast<size_t>(i)].forward(
                    x, stats, layer_name("enc", e, i));
                skips_[static_cast<size_t>(e)][static_cast<size_t>(i)] = x;
                x = encoders_[static_cast<size_t>(e)].pools[static_cast<size_t>(i)].forward(x);
            }
            bottoms_[static_cast<size_t>(e)] = std::move(x);
        }

        // condition map resized to the bottleneck grid
        const Index bh = in.mag.h / 16, bw = in.mag.w / 16;
        cond_resized_ = Tensor<S>(2, bh, bw);
        for (int i = 0; i < 2; ++i) {
            Image<S> plane = in.condition.plane_copy(i);
            cond_resized_.plane(i) = resize_bilinear(plane, bh, bw);
        }

        // bottleneck(s)
        const int nb = static_cast<int>(bnecks_.size());
        bneck_out_.resize(static_cast<size_t>(nb));
        for (int b = 0; b < nb; ++b) {
            std::vector<const Tensor<S>*> parts;
            for (int e : bneck_feed(b)) parts.push_back(&bottoms_[static_cast<size_t>(e)]);
            parts.push_back(&cond_resized_);
            Tensor<S> fused = concat_channels<S>(parts);
            Tensor<S> p = bnecks_[static_cast<size_t>(b)].proj.forward(fused);
            bneck_out_[static_cast<size_t>(b)] = bnecks_[static_cast<size_t>(b)].block.forward(
                p, stats, "bneck" + std::to_string(b));
        }

        // decoders
        const int nd = num_decoders();
        std::vector<Tensor<S>> head_out(static_cast<size_t>(nd));
        for (int d = 0; d < nd; ++d) {
            Decoder& dec = decoders_[static_cast<size_t>(d)];
            Tensor<S> x = bneck_out_[static_cast<size_t>(cfg_.shared_bottleneck ? 0 : d)];
            for (int i = 3; i >= 0; --i) {
                DecoderLevel& lvl = dec.levels[static_cast<size_t>(i)];
                Tensor<S> g = lvl.up.forward(x);
                Tensor<S> skip = gather_skips(d, i);
                Tensor<S> gated = cfg_.use_attention ? lvl.gate.forward(skip, g) : skip;
                Tensor<S> cat = concat_channels<S>({&g, &gated});
                lvl.g_channels = g.c;
                x = lvl.block.forward(cat, stats, layer_name("dec", d, i));
            }
            head_out[static_cast<size_t>(d)] = dec.head.forward(x);
        }

        // heads: synthesis = squash(conv + residual-base preimage)
        Tensor<S> mag_z, phase_z, mask_z;
        if (cfg_.independent_decoders) {
            mag_z = head_out[0];
            phase_z = head_out[1];
            mask_z = head_out[2];
        } else {
            mag_z = slice_channels(head_out[0], 0, 1);
            phase_z = slice_channels(head_out[0], 1, 3);
            mask_z = slice_channels(head_out[0], 4, 1);
        }
        mag_z.m += in.mag_base_logit.m;
        phase_z.m += in.phase_base_atanh.m;

        NetOutputs<S> out;
        out.mag_pred = mag_z;
        out.mag_pred.m = (S(1) / (S(1) + (-mag_z.m.array()).exp())).matrix();
        out.phase_pred = phase_z;
        out.phase_pred.m = phase_z.m.array().tanh().matrix();
        out.mask_prob = mask_z;
        out.mask_prob.m = (S(1) / (S(1) + (-mask_z.m.array()).exp())).matrix();
        outputs_ = out;
        return out;
    }

    /// Accumulates parameter gradients from dL/d(mag_pred, phase_pred,
    /// mask_prob). Must follow a forward() on the same inputs.
    void backward(const Tensor<S>& dmag, const Tensor<S>& dphase, const Tensor<S>& dmask_prob) {
        Tensor<S> dz_mag = dmag;
        dz_mag.m.array() *= outputs_.mag_pred.m.array() * (S(1) - outputs_.mag_pred.m.array());
        Tensor<S> dz_phase = dphase;
        dz_phase.m.array() *= S(1) - outputs_.phase_pred.m.array().square();
        Tensor<S> dz_mask = dmask_prob;
        dz_mask.m.array() *= outputs_.mask_prob.m.array() * (S(1) - outputs_.mask_prob.m.array());

        const int nd = num_decoders();
        std::vector<Tensor<S>> dhead(static_cast<size_t>(nd));
        if (cfg_.independent_decoders) {
            dhead = {dz_mag, dz_phase, dz_mask};
        } else {
            dhead[0] = Tensor<S>(5, dz_mag.h, dz_mag.w);
            dhead[0].m.row(0) = dz_mag.m.row(0);
            dhead[0].m.middleRows(1, 3) = dz_phase.m;
            dhead[0].m.row(4) = dz_mask.m.row(0);
        }

        // zeroed skip/bottom gradient accumulators
        const int ne = num_encoders();
        std::vector<std::vector<Tensor<S>>> dskips(static_cast<size_t>(ne));
        std::vector<Tensor<S>> dbottoms(static_cast<size_t>(ne));
        for (int e = 0; e < ne; ++e) {
            dskips[static_cast<size_t>(e)].resize(4);
            for (int i = 0; i < 4; ++i) {
                const Tensor<S>& s = skips_[static_cast<size_t>(e)][static_cast<size_t>(i)];
                dskips[static_cast<size_t>(e)][static_cast<size_t>(i)] = Tensor<S>(s.c, s.h, s.w);
            }
            const Tensor<S>& b = bottoms_[static_cast<size_t>(e)];
            dbottoms[static_cast<size_t>(e)] = Tensor<S>(b.c, b.h, b.w);
        }
        std::vector<Tensor<S>> dbneck_out(bnecks_.size());
        for (size_t b = 0; b < bnecks_.size(); ++b) {
            const Tensor<S>& t = bneck_out_[b];
            dbneck_out[b] = Tensor<S>(t.c, t.h, t.w);
        }

        // decoders, reverse order of forward
        for (int d = nd - 1; d >= 0; --d) {
            Decoder& dec = decoders_[static_cast<size_t>(d)];
            Tensor<S> dx = dec.head.backward(dhead[static_cast<size_t>(d)]);
            for (int i = 0; i <= 3; ++i) {
                DecoderLevel& lvl = dec.levels[static_cast<size_t>(i)];
                Tensor<S> dcat = lvl.block.backward(dx);
                Tensor<S> dg = slice_channels(dcat, 0, lvl.g_channels);
                Tensor<S> dgated = slice_channels(dcat, lvl.g_channels, dcat.c - lvl.g_channels);
                Tensor<S> dskip_total;
                if (cfg_.use_attention) {
                    auto [dskip, dg2] = lvl.gate.backward(dgated);
                    dskip_total = std::move(dskip);
                    dg.m += dg2.m;
                } else {
                    dskip_total = std::move(dgated);
                }
                scatter_skip_grad(d, i, dskip_total, dskips);
                dx = lvl.up.backward(dg);
            }
            dbneck_out[static_cast<size_t>(cfg_.shared_bottleneck ? 0 : d)].m += dx.m;
        }

        // bottlenecks
        for (int b = static_cast<int>(bnecks_.size()) - 1; b >= 0; --b) {
            Tensor<S> dp = bnecks_[static_cast<size_t>(b)].block.backward(dbneck_out[static_cast<size_t>(b)]);
            Tensor<S> dfused = bnecks_[static_cast<size_t>(b)].proj.backward(dp);
            int row = 0;
            for (int e : bneck_feed(b)) {
                Tensor<S>& db = dbottoms[static_cast<size_t>(e)];
                db.m += dfused.m.middleRows(row, db.c);
                row += db.c;
            }
            // condition-map gradient discarded (input, not learned)
        }

        // encoders, reverse
        for (int e = ne - 1; e >= 0; --e) {
            Tensor<S> dx = dbottoms[static_cast<size_t>(e)];
            for (int i = 3; i >= 0; --i) {
                Tensor<S> ds = encoders_[static_cast<size_t>(e)].pools[static_cast<size_t>(i)].backward(dx);
                ds.m += dskips[static_cast<size_t>(e)][static_cast<size_t>(i)].m;
                dx = encoders_[static_cast<size_t>(e)].blocks[static_cast<size_t>(i)].backward(ds);
            }
        }
    }

    void visit_params(const ParamVisitor<S>& v) {
        for (size_t e = 0; e < encoders_.size(); ++e)
            for (int i = 0; i < 4; ++i)
                encoders_[e].blocks[static_cast<size_t>(i)].visit(
                    "enc" + std::to_string(e) + ".b" + std::to_string(i), v);
        for (size_t b = 0; b < bnecks_.size(); ++b) {
            bnecks_[b].proj.visit("bneck" + std::to_string(b) + ".proj", v);
            bnecks_[b].block.visit("bneck" + std::to_string(b) + ".block", v);
        }
        for (size_t d = 0; d < decoders_.size(); ++d) {
            for (int i = 0; i < 4; ++i) {
                const std::string p = "dec" + std::to_string(d) + ".l" + std::to_string(i);
                if (cfg_.use_attention) decoders_[d].levels[static_cast<size_t>(i)].gate.visit(p + ".gate", v);
                decoders_[d].levels[static_cast<size_t>(i)].block.visit(p + ".block", v);
            }
            decoders_[d].head.visit("dec" + std::to_string(d) + ".head", v);
        }
    }

    void zero_grad() {
        visit_params([](const std::string&, Mat&, Mat& g) { g.setZero(); });
    }

    size_t param_count() {
        size_t n = 0;
        visit_params([&n](const std::string&, Mat& w, Mat&) { n += static_cast<size_t>(w.size()); });
        return n;
    }

    /// Zeroes the magnitude/phase head convolutions; the synthesis outputs
    /// then reduce to the anchor interpolation.
    void zero_synthesis_heads() {
        visit_params([this](const std::string& name, Mat& w, Mat&) {
            const bool head = name.find(".head.") != std::string::npos;
            if (!head) return;
            if (cfg_.independent_decoders) {
                if (name.starts_with("dec0.") || name.starts_with("dec1.")) w.setZero();
            } else {
                w.setZero();  // single 5-channel head: zeroing also covers mask
            }
        });
    }

private:
    struct Encoder {
        std::array<ConvBlock<S>, 4> blocks;
        std::array<MaxPool2<S>, 4> pools;
    };
    struct Bottleneck {
        Conv2d<S> proj;   // 1x1 fuse projection
        ConvBlock<S> block;
    };
    struct DecoderLevel {
        UpsampleNearest2<S> up;
        AttentionGate<S> gate;
        ConvBlock<S> block;
        int g_channels = 0;
    };
    struct Decoder {
        std::array<DecoderLevel, 4> levels;
        Conv2d<S> head;
    };

    int width(int level) const { return cfg_.base_channels << level; }
    int bneck_width() const { return cfg_.base_channels << 4; }

    /// Encoders feeding decoder-thread d's skips (and its bottleneck when not
    /// shared): the matching encoder when both sides are 3-way, all encoders
    /// when three encoders feed one decoder.
    std::vector<int> thread_feed(int d) const {
        if (!cfg_.independent_encoders) return {0};
        if (num_decoders() == 3) return {d};
        return {0, 1, 2};
    }

    std::vector<int> bneck_feed(int b) const {
        if (cfg_.shared_bottleneck) {
            std::vector<int> all(static_cast<size_t>(num_encoders()));
            for (int e = 0; e < num_encoders(); ++e) all[static_cast<size_t>(e)] = e;
            return all;
        }
        return thread_feed(b);
    }

    int skip_channels(int d, int level) const {
        return width(level) * static_cast<int>(thread_feed(d).size());
    }

    Tensor<S> gather_skips(int d, int level) {
        const auto feed = thread_feed(d);
        if (feed.size() == 1)
            return skips_[static_cast<size_t>(feed[0])][static_cast<size_t>(level)];
        std::vector<const Tensor<S>*> parts;
        for (int e : feed) parts.push_back(&skips_[static_cast<size_t>(e)][static_cast<size_t>(level)]);
        return concat_channels<S>(parts);
    }

    void scatter_skip_grad(int d, int level, const Tensor<S>& dskip,
                           std::vector<std::vector<Tensor<S>>>& dskips) const {
        const auto feed = thread_feed(d);
        int row = 0;
        for (int e : feed) {
            Tensor<S>& acc = dskips[static_cast<size_t>(e)][static_cast<size_t>(level)];
            acc.m += dskip.m.middleRows(row, acc.c);
            row += acc.c;
        }
    }

    static std::string layer_name(const char* kind, int idx, int level) {
        return std::string(kind) + std::to_string(idx) + ".b" + std::to_string(level);
    }

    void check_input(const NetInputs<S>& in) {
        if (in.mag.h % 16 != 0 || in.mag.w % 16 != 0)
            throw ShapeError("network input spatial size must be divisible by 16, got " +
                             std::to_string(in.mag.h) + "x" + std::to_string(in.mag.w));
        bool finite = true;
        visit_params([&finite](const std::string&, Mat& w, Mat&) { finite = finite && w.allFinite(); });
        if (!finite) throw NumericError("network parameters contain NaN/Inf");
    }

    void build() {
        const int ne = num_encoders();
        const int nd = num_decoders();
        encoders_.resize(static_cast<size_t>(ne));
        const std::array<int, 3> enc_in = cfg_.independent_encoders ? std::array<int, 3>{2, 6, 2}
                                                                    : std::array<int, 3>{10, 0, 0};
        for (int e = 0; e < ne; ++e) {
            int cin = enc_in[static_cast<size_t>(e)];
            for (int i = 0; i < 4; ++i) {
                encoders_[static_cast<size_t>(e)].blocks[static_cast<size_t>(i)] =
                    ConvBlock<S>(cin, width(i));
                cin = width(i);
            }
        }

        const int nb = cfg_.shared_bottleneck ? 1 : nd;
        bnecks_.resize(static_cast<size_t>(nb));
        for (int b = 0; b < nb; ++b) {
            const int fused = width(3) * static_cast<int>(bneck_feed(b).size()) + 2;
            bnecks_[static_cast<size_t>(b)].proj = Conv2d<S>(fused, bneck_width(), 1);
            bnecks_[static_cast<size_t>(b)].block = ConvBlock<S>(bneck_width(), bneck_width());
        }

        decoders_.resize(static_cast<size_t>(nd));
        const std::array<int, 3> head_out = cfg_.independent_decoders ? std::array<int, 3>{1, 3, 1}
                                                                      : std::array<int, 3>{5, 0, 0};
        for (int d = 0; d < nd; ++d) {
            Decoder& dec = decoders_[static_cast<size_t>(d)];
            for (int i = 3; i >= 0; --i) {
                const int g_ch = (i == 3) ? bneck_width() : width(i + 1);
                const int s_ch = skip_channels(d, i);
                if (cfg_.use_attention)
                    dec.levels[static_cast<size_t>(i)].gate = AttentionGate<S>(s_ch, g_ch, width(i));
                dec.levels[static_cast<size_t>(i)].block = ConvBlock<S>(g_ch + s_ch, width(i));
            }
            dec.head = Conv2d<S>(width(0), head_out[static_cast<size_t>(d)], 1);
        }
    }

    void init_params(uint64_t seed) {
        Rng rng(seed);
        visit_params([&rng](const std::string& name, Mat& w, Mat&) {
            if (name.ends_with(".weight")) {
                const double fan_in = static_cast<double>(w.cols());
                const double stddev = std::sqrt(2.0 / fan_in);
                for (Index i = 0; i < w.rows(); ++i)
                    for (Index j = 0; j < w.cols(); ++j)
                        w(i, j) = static_cast<S>(stddev * rng.gaussian());
            }
            // biases start at zero, norm gamma/beta at identity (set in ctors)
        });
    }

    NetworkConfig cfg_;
    std::vector<Encoder> encoders_;
    std::vector<Bottleneck> bnecks_;
    std::vector<Decoder> decoders_;

    // forward caches
    std::vector<std::vector<Tensor<S>>> skips_;
    std::vector<Tensor<S>> bottoms_;
    std::vector<Tensor<S>> bneck_out_;
    Tensor<S> cond_resized_;
    NetOutputs<S> outputs_;
};

/// The four Table-2 ablation rows.
struct AblationSetup {
    NetworkConfig net;
    bool weighted_loss = true;
    std::string label;
};

inline AblationSetup configure_ablation(AblationRow row, int base_channels = 16) {
    AblationSetup s;
    s.net.base_channels = base_channels;
    switch (row) {
        case AblationRow::sep_no_shared:
            s.net.independent_encoders = true;
            s.net.independent_decoders = true;
            s.net.shared_bottleneck = false;
            s.weighted_loss = true;
            s.label = "independent encoder/decoder, no shared hidden layer";
            break;
        case AblationRow::shared_no_independent:
            s.net.independent_encoders = false;
            s.net.independent_decoders = false;
            s.net.shared_bottleneck = true;
            s.weighted_loss = true;
            s.label = "shared encoder/decoder, shared hidden layer";
            break;
        case AblationRow::no_weighted_loss:
            s.net.independent_encoders = true;
            s.net.independent_decoders = true;
            s.net.shared_bottleneck = true;
            s.weighted_loss = false;
            s.label = "full architecture, unweighted loss";
            break;
        case AblationRow::full:
            s.net.independent_encoders = true;
            s.net.independent_decoders = true;
            s.net.shared_bottleneck = true;
            s.weighted_loss = true;
            s.label = "full architecture, weighted loss";
            break;
    }
    return s;
}

}  // namespace mvm::net
