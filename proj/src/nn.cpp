#include "icsplit/nn.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace icsplit {

using nlohmann::json;

LayerSpec LayerSpec::conv(int in_ch, int out_ch, int k, int stride, int pad) {
    LayerSpec s;
    s.kind = LayerKind::Conv;
    s.in_ch = in_ch;
    s.out_ch = out_ch;
    s.ksize = k;
    s.stride = stride;
    s.pad = pad;
    return s;
}

LayerSpec LayerSpec::dense(int in_dim, int out_dim) {
    LayerSpec s;
    s.kind = LayerKind::Dense;
    s.in_dim = in_dim;
    s.out_dim = out_dim;
    return s;
}

LayerSpec LayerSpec::reshape(int h, int w, int c) {
    LayerSpec s;
    s.kind = LayerKind::Reshape;
    s.out_h = h;
    s.out_w = w;
    s.out_ch = c;
    return s;
}

LayerSpec LayerSpec::upsample(int h, int w) {
    LayerSpec s;
    s.kind = LayerKind::Upsample;
    s.out_h = h;
    s.out_w = w;
    return s;
}

ActShape layer_output_shape(const LayerSpec& layer, const ActShape& in) {
    switch (layer.kind) {
        case LayerKind::Conv: {
            if (in.flat) throw std::invalid_argument("conv: needs spatial input");
            if (in.c != layer.in_ch) throw std::invalid_argument("conv: channel mismatch");
            if (layer.ksize < 1 || layer.stride < 1 || layer.pad < 0 || layer.out_ch < 1)
                throw std::invalid_argument("conv: bad geometry");
            const int oh = (in.h + 2 * layer.pad - layer.ksize) / layer.stride + 1;
            const int ow = (in.w + 2 * layer.pad - layer.ksize) / layer.stride + 1;
            if (oh < 1 || ow < 1) throw std::invalid_argument("conv: output collapses");
            return ActShape::spatial(oh, ow, layer.out_ch);
        }
        case LayerKind::Dense:
            if (!in.flat) throw std::invalid_argument("dense: needs flat input (flatten first)");
            if (in.dim() != layer.in_dim) throw std::invalid_argument("dense: width mismatch");
            if (layer.out_dim < 1) throw std::invalid_argument("dense: bad width");
            return ActShape::flat_dim(layer.out_dim);
        case LayerKind::ReLU:
        case LayerKind::Sigmoid:
            return in;
        case LayerKind::Flatten:
            if (in.flat) throw std::invalid_argument("flatten: input already flat");
            return ActShape::flat_dim(in.dim());
        case LayerKind::Reshape:
            if (layer.out_h * layer.out_w * layer.out_ch != in.dim())
                throw std::invalid_argument("reshape: element count mismatch");
            return ActShape::spatial(layer.out_h, layer.out_w, layer.out_ch);
        case LayerKind::Upsample:
            if (in.flat) throw std::invalid_argument("upsample: needs spatial input");
            if (layer.out_h < in.h || layer.out_w < in.w)
                throw std::invalid_argument("upsample: target smaller than input");
            return ActShape::spatial(layer.out_h, layer.out_w, in.c);
        default:
            throw std::logic_error("unknown layer kind");
    }
}

namespace {

std::size_t count_param_layers(const std::vector<LayerSpec>& layers) {
    std::size_t n = 0;
    for (const auto& l : layers) n += l.has_params() ? 1 : 0;
    return n;
}

std::vector<ActShape> walk_shapes(const std::vector<LayerSpec>& layers, ActShape in) {
    std::vector<ActShape> shapes;
    shapes.reserve(layers.size() + 1);
    shapes.push_back(in);
    for (const auto& l : layers) shapes.push_back(layer_output_shape(l, shapes.back()));
    return shapes;
}

}  // namespace

void ArchitectureSpec::validate() const {
    if (input_h < 1 || input_w < 1 || input_c < 1 || latent_dim < 1)
        throw std::invalid_argument("architecture: bad input shape or latent_dim");
    if (encoder.empty() || decoder.empty())
        throw std::invalid_argument("architecture: encoder and decoder must be nonempty");
    const auto enc = walk_shapes(encoder, input_shape());
    const ActShape z = enc.back();
    if (!z.flat || z.dim() != latent_dim)
        throw std::invalid_argument("architecture: encoder must end in a flat latent_dim vector");
    const auto dec = walk_shapes(decoder, ActShape::flat_dim(latent_dim));
    const ActShape out = dec.back();
    if (out.flat || out.h != input_h || out.w != input_w || out.c != input_c)
        throw std::invalid_argument("architecture: decoder must restore the input shape");
    if (count_param_layers(encoder) != count_param_layers(decoder))
        throw std::invalid_argument("architecture: encoder/decoder parameter layer counts differ");
}

ArchitectureSpec default_architecture(int h, int w, int c, int latent_dim, int base_channels) {
    auto conv_out = [](int n) { return (n + 2 - 3) / 2 + 1; };
    const int h1 = conv_out(h), w1 = conv_out(w);
    const int h2 = conv_out(h1), w2 = conv_out(w1);
    const int h3 = conv_out(h2), w3 = conv_out(w2);
    const int c1 = base_channels, c2 = 2 * base_channels, c3 = 4 * base_channels;
    const int bottleneck = h3 * w3 * c3;

    ArchitectureSpec a;
    a.input_h = h;
    a.input_w = w;
    a.input_c = c;
    a.latent_dim = latent_dim;
    a.encoder = {
        LayerSpec::conv(c, c1, 3, 2, 1),  LayerSpec::relu(),
        LayerSpec::conv(c1, c2, 3, 2, 1), LayerSpec::relu(),
        LayerSpec::conv(c2, c3, 3, 2, 1), LayerSpec::relu(),
        LayerSpec::flatten(),             LayerSpec::dense(bottleneck, latent_dim),
    };
    a.decoder = {
        LayerSpec::dense(latent_dim, bottleneck),
        LayerSpec::relu(),
        LayerSpec::reshape(h3, w3, c3),
        LayerSpec::upsample(h2, w2),
        LayerSpec::conv(c3, c2, 3, 1, 1),
        LayerSpec::relu(),
        LayerSpec::upsample(h1, w1),
        LayerSpec::conv(c2, c1, 3, 1, 1),
        LayerSpec::relu(),
        LayerSpec::upsample(h, w),
        LayerSpec::conv(c1, c, 3, 1, 1),
        LayerSpec::sigmoid(),
    };
    a.validate();
    return a;
}

bool AutoencoderParams::congruent_with(const GradientSet& g) const {
    if (g.size() != layers.size()) return false;
    for (std::size_t i = 0; i < g.size(); ++i)
        if (g[i].w.size() != layers[i].w.size() || g[i].b.size() != layers[i].b.size())
            return false;
    return true;
}

AutoencoderParams init_params(const ArchitectureSpec& arch, std::uint64_t seed) {
    arch.validate();
    AutoencoderParams p;
    p.arch = arch;
    p.init_seed = seed;
    p.layers.resize(arch.layer_count());
    Rng rng(mix_seed(seed, 0x1417u));
    for (std::size_t i = 0; i < arch.layer_count(); ++i) {
        const LayerSpec& l = arch.layer(i);
        if (l.kind == LayerKind::Conv) {
            const std::size_t n = std::size_t(l.ksize) * l.ksize * l.in_ch * l.out_ch;
            const double stdev = std::sqrt(2.0 / (double(l.ksize) * l.ksize * l.in_ch));
            p.layers[i].w.resize(n);
            for (auto& x : p.layers[i].w) x = stdev * rng.normal();
            p.layers[i].b.assign(std::size_t(l.out_ch), 0.0);
        } else if (l.kind == LayerKind::Dense) {
            const std::size_t n = std::size_t(l.in_dim) * l.out_dim;
            const double stdev = std::sqrt(2.0 / double(l.in_dim));
            p.layers[i].w.resize(n);
            for (auto& x : p.layers[i].w) x = stdev * rng.normal();
            p.layers[i].b.assign(std::size_t(l.out_dim), 0.0);
        }
    }
    return p;
}

std::size_t param_count(const AutoencoderParams& params) {
    std::size_t n = 0;
    for (const auto& l : params.layers) n += l.w.size() + l.b.size();
    return n;
}

namespace {

// conv weight layout: [ky][kx][in_ch][out_ch]; dense: [in][out]

void conv_forward(const LayerSpec& l, const LayerParams& p, const ActShape& is,
                  const ActShape& os, const Matrix& in, Matrix& out) {
    const int k = l.ksize, ic = l.in_ch, oc = l.out_ch;
    for (std::size_t b = 0; b < in.rows; ++b) {
        const double* inb = in.row(b);
        double* outb = out.row(b);
        for (int oy = 0; oy < os.h; ++oy) {
            for (int ox = 0; ox < os.w; ++ox) {
                double* o = outb + (std::size_t(oy) * os.w + ox) * oc;
                for (int m = 0; m < oc; ++m) o[m] = p.b[std::size_t(m)];
                for (int ky = 0; ky < k; ++ky) {
                    const int iy = oy * l.stride - l.pad + ky;
                    if (iy < 0 || iy >= is.h) continue;
                    for (int kx = 0; kx < k; ++kx) {
                        const int ix = ox * l.stride - l.pad + kx;
                        if (ix < 0 || ix >= is.w) continue;
                        const double* ip = inb + (std::size_t(iy) * is.w + ix) * ic;
                        const double* wp = p.w.data() + (std::size_t(ky) * k + kx) * ic * oc;
                        for (int cc = 0; cc < ic; ++cc) {
                            const double a = ip[cc];
                            const double* wr = wp + std::size_t(cc) * oc;
                            for (int m = 0; m < oc; ++m) o[m] += a * wr[m];
                        }
                    }
                }
            }
        }
    }
}

void conv_backward(const LayerSpec& l, const LayerParams& p, const ActShape& is,
                   const ActShape& os, const Matrix& in, const Matrix& d_out, Matrix& d_in,
                   LayerParams& g) {
    const int k = l.ksize, ic = l.in_ch, oc = l.out_ch;
    for (std::size_t b = 0; b < in.rows; ++b) {
        const double* inb = in.row(b);
        double* dinb = d_in.row(b);
        const double* doutb = d_out.row(b);
        for (int oy = 0; oy < os.h; ++oy) {
            for (int ox = 0; ox < os.w; ++ox) {
                const double* go = doutb + (std::size_t(oy) * os.w + ox) * oc;
                for (int m = 0; m < oc; ++m) g.b[std::size_t(m)] += go[m];
                for (int ky = 0; ky < k; ++ky) {
                    const int iy = oy * l.stride - l.pad + ky;
                    if (iy < 0 || iy >= is.h) continue;
                    for (int kx = 0; kx < k; ++kx) {
                        const int ix = ox * l.stride - l.pad + kx;
                        if (ix < 0 || ix >= is.w) continue;
                        const std::size_t in_off = (std::size_t(iy) * is.w + ix) * ic;
                        const std::size_t w_off = (std::size_t(ky) * k + kx) * ic * oc;
                        for (int cc = 0; cc < ic; ++cc) {
                            const double a = inb[in_off + cc];
                            double* dwr = g.w.data() + w_off + std::size_t(cc) * oc;
                            const double* wr = p.w.data() + w_off + std::size_t(cc) * oc;
                            double s = 0.0;
                            for (int m = 0; m < oc; ++m) {
                                dwr[m] += a * go[m];
                                s += wr[m] * go[m];
                            }
                            dinb[in_off + cc] += s;
                        }
                    }
                }
            }
        }
    }
}

void dense_forward(const LayerSpec& l, const LayerParams& p, const Matrix& in, Matrix& out) {
    const int I = l.in_dim, O = l.out_dim;
    for (std::size_t b = 0; b < in.rows; ++b) {
        const double* ib = in.row(b);
        double* o = out.row(b);
        for (int m = 0; m < O; ++m) o[m] = p.b[std::size_t(m)];
        for (int i = 0; i < I; ++i) {
            const double a = ib[i];
            const double* wr = p.w.data() + std::size_t(i) * O;
            for (int m = 0; m < O; ++m) o[m] += a * wr[m];
        }
    }
}

void dense_backward(const LayerSpec& l, const LayerParams& p, const Matrix& in,
                    const Matrix& d_out, Matrix& d_in, LayerParams& g) {
    const int I = l.in_dim, O = l.out_dim;
    for (std::size_t b = 0; b < in.rows; ++b) {
        const double* ib = in.row(b);
        const double* go = d_out.row(b);
        double* di = d_in.row(b);
        for (int m = 0; m < O; ++m) g.b[std::size_t(m)] += go[m];
        for (int i = 0; i < I; ++i) {
            const double a = ib[i];
            double* dwr = g.w.data() + std::size_t(i) * O;
            const double* wr = p.w.data() + std::size_t(i) * O;
            double s = 0.0;
            for (int m = 0; m < O; ++m) {
                dwr[m] += a * go[m];
                s += wr[m] * go[m];
            }
            di[i] += s;
        }
    }
}

void upsample_forward(const ActShape& is, const ActShape& os, const Matrix& in, Matrix& out) {
    for (std::size_t b = 0; b < in.rows; ++b) {
        const double* ib = in.row(b);
        double* o = out.row(b);
        for (int oy = 0; oy < os.h; ++oy) {
            const int iy = oy * is.h / os.h;
            for (int ox = 0; ox < os.w; ++ox) {
                const int ix = ox * is.w / os.w;
                const double* src = ib + (std::size_t(iy) * is.w + ix) * is.c;
                double* dst = o + (std::size_t(oy) * os.w + ox) * os.c;
                for (int cc = 0; cc < is.c; ++cc) dst[cc] = src[cc];
            }
        }
    }
}

void upsample_backward(const ActShape& is, const ActShape& os, const Matrix& d_out,
                       Matrix& d_in) {
    for (std::size_t b = 0; b < d_out.rows; ++b) {
        const double* go = d_out.row(b);
        double* di = d_in.row(b);
        for (int oy = 0; oy < os.h; ++oy) {
            const int iy = oy * is.h / os.h;
            for (int ox = 0; ox < os.w; ++ox) {
                const int ix = ox * is.w / os.w;
                const double* src = go + (std::size_t(oy) * os.w + ox) * os.c;
                double* dst = di + (std::size_t(iy) * is.w + ix) * is.c;
                for (int cc = 0; cc < is.c; ++cc) dst[cc] += src[cc];
            }
        }
    }
}

void forward_layer(const LayerSpec& l, const LayerParams& p, const ActShape& is,
                   const ActShape& os, const Matrix& in, Matrix& out) {
    out = Matrix(in.rows, std::size_t(os.dim()));
    switch (l.kind) {
        case LayerKind::Conv: conv_forward(l, p, is, os, in, out); break;
        case LayerKind::Dense: dense_forward(l, p, in, out); break;
        case LayerKind::ReLU:
            for (std::size_t i = 0; i < in.v.size(); ++i) out.v[i] = in.v[i] > 0.0 ? in.v[i] : 0.0;
            break;
        case LayerKind::Sigmoid:
            for (std::size_t i = 0; i < in.v.size(); ++i) out.v[i] = 1.0 / (1.0 + std::exp(-in.v[i]));
            break;
        case LayerKind::Flatten:
        case LayerKind::Reshape: out.v = in.v; break;
        case LayerKind::Upsample: upsample_forward(is, os, in, out); break;
    }
}

void backward_layer(const LayerSpec& l, const LayerParams& p, const ActShape& is,
                    const ActShape& os, const Matrix& in, const Matrix& out, const Matrix& d_out,
                    Matrix& d_in, LayerParams& g) {
    d_in = Matrix(in.rows, std::size_t(is.dim()));
    switch (l.kind) {
        case LayerKind::Conv: conv_backward(l, p, is, os, in, d_out, d_in, g); break;
        case LayerKind::Dense: dense_backward(l, p, in, d_out, d_in, g); break;
        case LayerKind::ReLU:
            for (std::size_t i = 0; i < in.v.size(); ++i)
                d_in.v[i] = in.v[i] > 0.0 ? d_out.v[i] : 0.0;
            break;
        case LayerKind::Sigmoid:
            for (std::size_t i = 0; i < in.v.size(); ++i)
                d_in.v[i] = d_out.v[i] * out.v[i] * (1.0 - out.v[i]);
            break;
        case LayerKind::Flatten:
        case LayerKind::Reshape: d_in.v = d_out.v; break;
        case LayerKind::Upsample: upsample_backward(is, os, d_out, d_in); break;
    }
}

GradientSet zero_like(const AutoencoderParams& params) {
    GradientSet g(params.layers.size());
    for (std::size_t i = 0; i < params.layers.size(); ++i) {
        g[i].w.assign(params.layers[i].w.size(), 0.0);
        g[i].b.assign(params.layers[i].b.size(), 0.0);
    }
    return g;
}

Matrix run_chain(const AutoencoderParams& params, std::size_t first_layer,
                 const std::vector<LayerSpec>& layers, ActShape in_shape, const Matrix& input,
                 std::vector<Matrix>* acts, std::vector<ActShape>* shapes) {
    if (input.cols != std::size_t(in_shape.dim()))
        throw std::invalid_argument("forward: batch width does not match architecture");
    Matrix cur = input;
    ActShape cs = in_shape;
    if (acts) acts->push_back(cur);
    if (shapes) shapes->push_back(cs);
    for (std::size_t i = 0; i < layers.size(); ++i) {
        const ActShape os = layer_output_shape(layers[i], cs);
        Matrix next;
        forward_layer(layers[i], params.layers[first_layer + i], cs, os, cur, next);
        cur = std::move(next);
        cs = os;
        if (acts) acts->push_back(cur);
        if (shapes) shapes->push_back(cs);
    }
    return cur;
}

struct LatentLossTerms {
    double cls = 0.0, disp1 = 0.0, disp2 = 0.0;
};

LatentLossTerms latent_losses(const Matrix& z, const CompositeLossSpec& spec, Matrix* dz) {
    Matrix unused;
    Matrix& sink = dz ? *dz : unused;
    LatentLossTerms t;
    const BatchPlan& plan = spec.plan;
    if (plan.typical_rows.size() >= 2 && !plan.closeness_partner.empty())
        t.cls = distance_loss_grad(z, plan.typical_rows, plan.closeness_partner, +1.0,
                                   dz ? spec.weights.alpha : 0.0, sink);
    if (plan.atypical_rows.size() >= 2 && !plan.disp1_partner.empty())
        t.disp1 = distance_loss_grad(z, plan.atypical_rows, plan.disp1_partner, -1.0,
                                     dz ? spec.weights.beta1 : 0.0, sink);
    if (!plan.atypical_rows.empty() && !plan.disp2_partner.empty())
        t.disp2 = distance_loss_grad(z, plan.atypical_rows, plan.disp2_partner, -1.0,
                                     dz ? spec.weights.beta2 : 0.0, sink);
    return t;
}

double l2_term(const AutoencoderParams& params, double coeff) {
    if (coeff == 0.0) return 0.0;
    double acc = 0.0;
    for (std::size_t i = 0; i < params.arch.layer_count(); ++i)
        if (params.arch.layer(i).kind == LayerKind::Conv)
            for (double w : params.layers[i].w) acc += w * w;
    return coeff * acc;
}

}  // namespace

Matrix encode(const AutoencoderParams& params, const Matrix& batch) {
    return run_chain(params, 0, params.arch.encoder, params.arch.input_shape(), batch, nullptr,
                     nullptr);
}

Matrix decode(const AutoencoderParams& params, const Matrix& latent) {
    return run_chain(params, params.arch.encoder.size(), params.arch.decoder,
                     ActShape::flat_dim(params.arch.latent_dim), latent, nullptr, nullptr);
}

double composite_loss(const AutoencoderParams& params, const Matrix& batch,
                      const CompositeLossSpec& spec) {
    const Matrix z = encode(params, batch);
    const Matrix xhat = decode(params, z);
    const double rec = rec_loss(batch, xhat);
    const LatentLossTerms t = latent_losses(z, spec, nullptr);
    return total_loss(rec, t.cls, t.disp1, t.disp2, spec.weights) + l2_term(params, spec.l2);
}

BackwardResult backward(const AutoencoderParams& params, const Matrix& batch,
                        const CompositeLossSpec& spec) {
    const std::size_t n_enc = params.arch.encoder.size();

    std::vector<Matrix> acts;
    std::vector<ActShape> shapes;
    acts.reserve(params.arch.layer_count() + 2);
    const Matrix z = run_chain(params, 0, params.arch.encoder, params.arch.input_shape(), batch,
                               &acts, &shapes);
    std::vector<Matrix> dacts;  // dacts[0] == z; dacts[i] is decoder layer i's input
    std::vector<ActShape> dshapes;
    run_chain(params, n_enc, params.arch.decoder, ActShape::flat_dim(params.arch.latent_dim), z,
              &dacts, &dshapes);
    const Matrix& xhat = dacts.back();

    BackwardResult out;
    out.rec = rec_loss(batch, xhat);
    Matrix dz_extra(z.rows, z.cols);
    const LatentLossTerms t = latent_losses(z, spec, &dz_extra);
    out.cls = t.cls;
    out.disp1 = t.disp1;
    out.disp2 = t.disp2;
    out.loss = total_loss(out.rec, out.cls, out.disp1, out.disp2, spec.weights) +
               l2_term(params, spec.l2);
    if (!std::isfinite(out.loss))
        throw std::runtime_error("backward: non-finite loss (divergence)");

    out.grads = zero_like(params);

    // decoder backprop from the reconstruction error
    Matrix d = rec_loss_grad(batch, xhat);
    for (std::size_t i = params.arch.decoder.size(); i-- > 0;) {
        Matrix d_in;
        backward_layer(params.arch.decoder[i], params.layers[n_enc + i], dshapes[i],
                       dshapes[i + 1], dacts[i], dacts[i + 1], d, d_in, out.grads[n_enc + i]);
        d = std::move(d_in);
    }
    // inject latent-loss gradients at the bottleneck
    for (std::size_t i = 0; i < d.v.size(); ++i) d.v[i] += dz_extra.v[i];
    // encoder backprop
    for (std::size_t i = params.arch.encoder.size(); i-- > 0;) {
        Matrix d_in;
        backward_layer(params.arch.encoder[i], params.layers[i], shapes[i], shapes[i + 1],
                       acts[i], acts[i + 1], d, d_in, out.grads[i]);
        d = std::move(d_in);
    }

    if (spec.l2 != 0.0) {
        for (std::size_t i = 0; i < params.arch.layer_count(); ++i)
            if (params.arch.layer(i).kind == LayerKind::Conv) {
                const auto& w = params.layers[i].w;
                auto& gw = out.grads[i].w;
                for (std::size_t j = 0; j < w.size(); ++j) gw[j] += 2.0 * spec.l2 * w[j];
            }
    }
    return out;
}

AdamState make_adam(const AutoencoderParams& params, const AdamConfig& cfg) {
    AdamState s;
    s.cfg = cfg;
    s.m = zero_like(params);
    s.v = zero_like(params);
    return s;
}

void optimizer_step(AutoencoderParams& params, const GradientSet& grads, AdamState& state) {
    if (!params.congruent_with(grads) || !params.congruent_with(state.m))
        throw std::invalid_argument("optimizer_step: shape mismatch");
    state.t += 1;
    const double b1 = state.cfg.beta1, b2 = state.cfg.beta2;
    const double bc1 = 1.0 - std::pow(b1, double(state.t));
    const double bc2 = 1.0 - std::pow(b2, double(state.t));
    auto update = [&](std::vector<double>& p, const std::vector<double>& g, std::vector<double>& m,
                      std::vector<double>& v) {
        for (std::size_t i = 0; i < p.size(); ++i) {
            m[i] = b1 * m[i] + (1.0 - b1) * g[i];
            v[i] = b2 * v[i] + (1.0 - b2) * g[i] * g[i];
            const double mhat = m[i] / bc1;
            const double vhat = v[i] / bc2;
            p[i] -= state.cfg.lr * mhat / (std::sqrt(vhat) + state.cfg.eps);
        }
    };
    for (std::size_t i = 0; i < params.layers.size(); ++i) {
        update(params.layers[i].w, grads[i].w, state.m[i].w, state.v[i].w);
        update(params.layers[i].b, grads[i].b, state.m[i].b, state.v[i].b);
    }
}

namespace {

json layer_to_json(const LayerSpec& l) {
    switch (l.kind) {
        case LayerKind::Conv:
            return {{"kind", "conv"}, {"in_ch", l.in_ch}, {"out_ch", l.out_ch},
                    {"k", l.ksize},   {"stride", l.stride}, {"pad", l.pad}};
        case LayerKind::Dense:
            return {{"kind", "dense"}, {"in", l.in_dim}, {"out", l.out_dim}};
        case LayerKind::ReLU: return {{"kind", "relu"}};
        case LayerKind::Sigmoid: return {{"kind", "sigmoid"}};
        case LayerKind::Flatten: return {{"kind", "flatten"}};
        case LayerKind::Reshape:
            return {{"kind", "reshape"}, {"h", l.out_h}, {"w", l.out_w}, {"c", l.out_ch}};
        case LayerKind::Upsample:
            return {{"kind", "upsample"}, {"h", l.out_h}, {"w", l.out_w}};
    }
    throw std::logic_error("unknown layer kind");
}

LayerSpec layer_from_json(const json& j) {
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "conv")
        return LayerSpec::conv(j.at("in_ch"), j.at("out_ch"), j.at("k"), j.at("stride"),
                               j.at("pad"));
    if (kind == "dense") return LayerSpec::dense(j.at("in"), j.at("out"));
    if (kind == "relu") return LayerSpec::relu();
    if (kind == "sigmoid") return LayerSpec::sigmoid();
    if (kind == "flatten") return LayerSpec::flatten();
    if (kind == "reshape") return LayerSpec::reshape(j.at("h"), j.at("w"), j.at("c"));
    if (kind == "upsample") return LayerSpec::upsample(j.at("h"), j.at("w"));
    throw std::runtime_error("checkpoint: unknown layer kind '" + kind + "'");
}

}  // namespace

std::string checkpoint_to_string(const AutoencoderParams& params) {
    json j;
    j["format"] = "icsplit-autoencoder";
    j["version"] = 1;
    j["init_seed"] = params.init_seed;
    json arch;
    arch["input"] = {params.arch.input_h, params.arch.input_w, params.arch.input_c};
    arch["latent_dim"] = params.arch.latent_dim;
    arch["encoder"] = json::array();
    for (const auto& l : params.arch.encoder) arch["encoder"].push_back(layer_to_json(l));
    arch["decoder"] = json::array();
    for (const auto& l : params.arch.decoder) arch["decoder"].push_back(layer_to_json(l));
    j["arch"] = std::move(arch);
    j["layers"] = json::array();
    for (const auto& l : params.layers) j["layers"].push_back({{"w", l.w}, {"b", l.b}});
    return j.dump();
}

AutoencoderParams checkpoint_from_string(const std::string& text) {
    const json j = json::parse(text);
    if (j.at("format") != "icsplit-autoencoder")
        throw std::runtime_error("checkpoint: unrecognized format field");
    if (j.at("version").get<int>() != 1)
        throw std::runtime_error("checkpoint: unsupported version");
    AutoencoderParams p;
    const json& arch = j.at("arch");
    p.arch.input_h = arch.at("input").at(0);
    p.arch.input_w = arch.at("input").at(1);
    p.arch.input_c = arch.at("input").at(2);
    p.arch.latent_dim = arch.at("latent_dim");
    for (const auto& l : arch.at("encoder")) p.arch.encoder.push_back(layer_from_json(l));
    for (const auto& l : arch.at("decoder")) p.arch.decoder.push_back(layer_from_json(l));
    p.arch.validate();
    p.init_seed = j.at("init_seed").get<std::uint64_t>();
    for (const auto& l : j.at("layers")) {
        LayerParams lp;
        lp.w = l.at("w").get<std::vector<double>>();
        lp.b = l.at("b").get<std::vector<double>>();
        p.layers.push_back(std::move(lp));
    }
    if (p.layers.size() != p.arch.layer_count())
        throw std::runtime_error("checkpoint: tensor count does not match architecture");
    return p;
}

void save_checkpoint(const std::string& path, const AutoencoderParams& params) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error(path + ": cannot open for writing");
    out << checkpoint_to_string(params);
    if (!out) throw std::runtime_error(path + ": write failed");
}

AutoencoderParams load_checkpoint(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error(path + ": cannot open");
    std::stringstream ss;
    ss << in.rdbuf();
    return checkpoint_from_string(ss.str());
}

}  // namespace icsplit
