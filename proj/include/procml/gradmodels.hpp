#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <numeric>
#include <string>
#include <vector>

#include "procml/error.hpp"
#include "procml/io.hpp"
#include "procml/rng.hpp"
#include "procml/stats.hpp"

namespace procml {

struct TrainSpec {
    int epochs = 100;
    int batch_size = 63;
    double learning_rate = 1e-3;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_eps = 1e-8;
    std::uint64_t seed = 0;
};

inline void validate(const TrainSpec& spec) {
    if (spec.epochs < 1)
        throw InvalidSpec("epochs must be at least 1");
    if (spec.batch_size < 1)
        throw InvalidSpec("batch_size must be at least 1");
    if (!(spec.learning_rate >= 0.0))
        throw InvalidSpec("learning_rate must be nonnegative");
    if (!(spec.adam_beta1 >= 0.0 && spec.adam_beta1 < 1.0) ||
        !(spec.adam_beta2 >= 0.0 && spec.adam_beta2 < 1.0))
        throw InvalidSpec("adam betas must lie in [0, 1)");
    if (!(spec.adam_eps > 0.0))
        throw InvalidSpec("adam_eps must be positive");
}

struct ConvSpec {
    int channels = 4;
    int kernel_span = 0; // 0 means the full landmark configuration
};

struct AdamState {
    Vector m;
    Vector v;
    long step = 0;
};

/// One bias-corrected Adam update, in place.
inline void adam_step(Vector& params, const Vector& grads, AdamState& state,
                      const TrainSpec& spec) {
    if (state.step == 0) {
        state.m = Vector::Zero(params.size());
        state.v = Vector::Zero(params.size());
    }
    if (params.size() != grads.size() || params.size() != state.m.size())
        throw ShapeMismatch("parameter, gradient, and state sizes differ");

    ++state.step;
    state.m = spec.adam_beta1 * state.m + (1.0 - spec.adam_beta1) * grads;
    state.v = spec.adam_beta2 * state.v +
              (1.0 - spec.adam_beta2) * grads.array().square().matrix();
    const double mc = 1.0 - std::pow(spec.adam_beta1, static_cast<double>(state.step));
    const double vc = 1.0 - std::pow(spec.adam_beta2, static_cast<double>(state.step));
    params.array() -= spec.learning_rate * (state.m.array() / mc) /
                      ((state.v.array() / vc).sqrt() + spec.adam_eps);
}

/// Per-feature affine normalization; constant features keep scale 1.
struct Standardizer {
    RowVector mean;
    RowVector scale;

    static Standardizer fit(const Matrix& X) {
        Standardizer s;
        s.mean = X.colwise().mean();
        const Matrix xc = X.rowwise() - s.mean;
        s.scale = (xc.array().square().colwise().sum() /
                   std::max<double>(1.0, static_cast<double>(X.rows() - 1)))
                      .sqrt();
        for (Eigen::Index j = 0; j < s.scale.size(); ++j)
            if (s.scale(j) < 1e-12)
                s.scale(j) = 1.0;
        return s;
    }

    Matrix apply(const Matrix& X) const {
        return (X.rowwise() - mean).array().rowwise() / scale.array();
    }
};

struct LinearModel {
    Vector weights;
    double bias = 0.0;
};

inline Vector linear_predict(const LinearModel& model, const Matrix& X) {
    return (X * model.weights).array() + model.bias;
}

/// Convolution along the landmark axis with coordinates as input channels,
/// no activation, flattened into a single affine head.  The whole model is
/// linear in its input; depth only reshapes the training dynamics.
struct ConvModel {
    int p = 0;
    int k = 0;
    int channels = 0;
    int kernel_span = 0;
    Matrix kernels;   // channels x (kernel_span * k), landmark-major taps
    Vector conv_bias; // channels
    Vector head;      // channels * positions, channel-major
    double head_bias = 0.0;

    int positions() const { return p - kernel_span + 1; }
};

inline Vector conv_predict(const ConvModel& model, const Matrix& X) {
    if (X.cols() != static_cast<Eigen::Index>(model.p) * model.k)
        throw ShapeMismatch("input width does not match p * k");
    const int pos = model.positions();
    Vector out = Vector::Constant(X.rows(), model.head_bias);
    for (int t = 0; t < pos; ++t) {
        // taps over consecutive landmarks are contiguous in landmark-major order
        const auto slice = X.middleCols(static_cast<Eigen::Index>(t) * model.k,
                                        static_cast<Eigen::Index>(model.kernel_span) *
                                            model.k);
        for (int c = 0; c < model.channels; ++c) {
            const double h = model.head(static_cast<Eigen::Index>(c) * pos + t);
            out.noalias() += h * (slice * model.kernels.row(c).transpose());
            out.array() += h * model.conv_bias(c);
        }
    }
    return out;
}

namespace detail {

// mean squared error and its gradient for a flat-parameter model
struct BatchGrad {
    double loss = 0.0;
    Vector grad;
};

inline BatchGrad linear_loss_grad(const LinearModel& model, const Matrix& X,
                                  const Vector& y) {
    const Eigen::Index n = X.rows();
    const Vector r = linear_predict(model, X) - y;
    BatchGrad out;
    out.loss = r.squaredNorm() / static_cast<double>(n);
    out.grad.resize(model.weights.size() + 1);
    out.grad.head(model.weights.size()) =
        2.0 / static_cast<double>(n) * (X.transpose() * r);
    out.grad(model.weights.size()) = 2.0 / static_cast<double>(n) * r.sum();
    return out;
}

inline Vector pack(const LinearModel& m) {
    Vector v(m.weights.size() + 1);
    v.head(m.weights.size()) = m.weights;
    v(m.weights.size()) = m.bias;
    return v;
}

inline void unpack(const Vector& v, LinearModel& m) {
    m.weights = v.head(v.size() - 1);
    m.bias = v(v.size() - 1);
}

inline Eigen::Index conv_param_count(const ConvModel& m) {
    return m.kernels.size() + m.conv_bias.size() + m.head.size() + 1;
}

inline Vector pack(const ConvModel& m) {
    Vector v(conv_param_count(m));
    Eigen::Index at = 0;
    for (int c = 0; c < m.channels; ++c, at += m.kernels.cols())
        v.segment(at, m.kernels.cols()) = m.kernels.row(c);
    v.segment(at, m.conv_bias.size()) = m.conv_bias;
    at += m.conv_bias.size();
    v.segment(at, m.head.size()) = m.head;
    at += m.head.size();
    v(at) = m.head_bias;
    return v;
}

inline void unpack(const Vector& v, ConvModel& m) {
    Eigen::Index at = 0;
    for (int c = 0; c < m.channels; ++c, at += m.kernels.cols())
        m.kernels.row(c) = v.segment(at, m.kernels.cols());
    m.conv_bias = v.segment(at, m.conv_bias.size());
    at += m.conv_bias.size();
    m.head = v.segment(at, m.head.size());
    at += m.head.size();
    m.head_bias = v(at);
}

inline BatchGrad conv_loss_grad(const ConvModel& model, const Matrix& X,
                                const Vector& y) {
    const Eigen::Index n = X.rows();
    const int pos = model.positions();
    const Vector r = conv_predict(model, X) - y;
    const Vector dldy = 2.0 / static_cast<double>(n) * r;

    Matrix grad_kernels = Matrix::Zero(model.kernels.rows(), model.kernels.cols());
    Vector grad_conv_bias = Vector::Zero(model.conv_bias.size());
    Vector grad_head = Vector::Zero(model.head.size());

    for (int t = 0; t < pos; ++t) {
        const auto slice = X.middleCols(static_cast<Eigen::Index>(t) * model.k,
                                        static_cast<Eigen::Index>(model.kernel_span) *
                                            model.k);
        for (int c = 0; c < model.channels; ++c) {
            const Eigen::Index hidx = static_cast<Eigen::Index>(c) * pos + t;
            const double h = model.head(hidx);
            const Vector activ =
                (slice * model.kernels.row(c).transpose()).array() +
                model.conv_bias(c);
            grad_head(hidx) = dldy.dot(activ);
            grad_kernels.row(c) += h * (dldy.transpose() * slice);
            grad_conv_bias(c) += h * dldy.sum();
        }
    }

    ConvModel shadow = model;
    shadow.kernels = grad_kernels;
    shadow.conv_bias = grad_conv_bias;
    shadow.head = grad_head;
    shadow.head_bias = dldy.sum();

    BatchGrad out;
    out.loss = r.squaredNorm() / static_cast<double>(n);
    out.grad = pack(shadow);
    return out;
}

template <typename Model, typename LossGrad>
std::vector<double> adam_train(Model& model, const Matrix& X, const Vector& y,
                               const TrainSpec& spec, LossGrad&& loss_grad) {
    const Eigen::Index n = X.rows();
    Vector params = pack(model);
    AdamState state;
    Rng rng = Rng(spec.seed).substream(1); // substream 0 feeds initialization

    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    std::vector<double> epoch_loss;
    epoch_loss.reserve(static_cast<std::size_t>(spec.epochs));

    for (int epoch = 0; epoch < spec.epochs; ++epoch) {
        rng.shuffle(order);
        double weighted = 0.0;
        for (Eigen::Index start = 0; start < n; start += spec.batch_size) {
            const Eigen::Index b =
                std::min<Eigen::Index>(spec.batch_size, n - start);
            Matrix xb(b, X.cols());
            Vector yb(b);
            for (Eigen::Index i = 0; i < b; ++i) {
                xb.row(i) = X.row(order[static_cast<std::size_t>(start + i)]);
                yb(i) = y(order[static_cast<std::size_t>(start + i)]);
            }
            unpack(params, model);
            BatchGrad bg = loss_grad(model, xb, yb);
            weighted += bg.loss * static_cast<double>(b);
            adam_step(params, bg.grad, state, spec);
        }
        epoch_loss.push_back(weighted / static_cast<double>(n));
    }
    unpack(params, model);
    return epoch_loss;
}

/// Recover the affine map a trained model realizes, by probing.  Exact for
/// these models because they are linear in the input.
template <typename Model, typename Predict>
FitResult effective_fit(const Model& model, Predict&& predict_fn,
                        const Standardizer& scaler, const Matrix& X_orig,
                        const Vector& y) {
    const Eigen::Index d = X_orig.cols();
    const double at_zero = predict_fn(model, Matrix::Zero(1, d))(0);
    const Vector responses = predict_fn(model, Matrix::Identity(d, d));

    FitResult fit;
    fit.coefficients.resize(d);
    double intercept = at_zero;
    for (Eigen::Index j = 0; j < d; ++j) {
        const double w = responses(j) - at_zero;
        fit.coefficients(j) = w / scaler.scale(j);
        intercept -= w * scaler.mean(j) / scaler.scale(j);
    }
    fit.intercept = intercept;
    fit.train_rmse = rmse(y, predict(fit, X_orig));
    return fit;
}

} // namespace detail

struct LinearTrainResult {
    LinearModel model; // in standardized feature space
    Standardizer scaler;
    FitResult fit; // equivalent affine map on original features
    std::vector<double> epoch_loss;
};

struct ConvTrainResult {
    ConvModel model; // in standardized feature space
    Standardizer scaler;
    FitResult fit;
    std::vector<double> epoch_loss;
};

/// Mini-batch Adam on MSE for a single affine map.  Features are
/// standardized with training statistics; the returned fit folds the
/// standardization back so it applies directly to raw inputs.
inline LinearTrainResult train_linear_model(const Matrix& X, const Vector& y,
                                            const TrainSpec& spec) {
    validate(spec);
    if (X.rows() == 0)
        throw EmptySample("cannot train on an empty sample");
    if (X.rows() != y.size())
        throw ShapeMismatch("design rows do not match response length");

    LinearTrainResult out;
    out.scaler = Standardizer::fit(X);
    const Matrix xs = out.scaler.apply(X);

    Rng init = Rng(spec.seed).substream(0);
    const double bound = 1.0 / std::sqrt(static_cast<double>(X.cols()));
    out.model.weights.resize(X.cols());
    for (Eigen::Index j = 0; j < X.cols(); ++j)
        out.model.weights(j) = init.uniform(-bound, bound);
    out.model.bias = y.mean(); // start the output at the response center

    out.epoch_loss = detail::adam_train(
        out.model, xs, y, spec,
        [](const LinearModel& m, const Matrix& xb, const Vector& yb) {
            return detail::linear_loss_grad(m, xb, yb);
        });

    out.fit = detail::effective_fit(
        out.model,
        [](const LinearModel& m, const Matrix& x) { return linear_predict(m, x); },
        out.scaler, X, y);
    return out;
}

/// Same trainer for the convolutional architecture.
inline ConvTrainResult train_conv_model(const Matrix& X, const Vector& y, int p,
                                        int k, const TrainSpec& spec,
                                        const ConvSpec& conv = {}) {
    validate(spec);
    if (X.rows() == 0)
        throw EmptySample("cannot train on an empty sample");
    if (X.rows() != y.size())
        throw ShapeMismatch("design rows do not match response length");
    if (X.cols() != static_cast<Eigen::Index>(p) * k)
        throw ShapeMismatch("input width does not match p * k");

    const int span = conv.kernel_span == 0 ? p : conv.kernel_span;
    if (span > p)
        throw InvalidSpec("kernel_span exceeds the landmark count");
    if (span < 1 || conv.channels < 1)
        throw InvalidSpec("conv model needs positive span and channels");

    ConvTrainResult out;
    out.scaler = Standardizer::fit(X);
    const Matrix xs = out.scaler.apply(X);

    ConvModel& m = out.model;
    m.p = p;
    m.k = k;
    m.channels = conv.channels;
    m.kernel_span = span;
    const int pos = m.positions();

    Rng init = Rng(spec.seed).substream(0);
    const double kb = 1.0 / std::sqrt(static_cast<double>(span) * k);
    m.kernels.resize(conv.channels, static_cast<Eigen::Index>(span) * k);
    for (int c = 0; c < conv.channels; ++c)
        for (Eigen::Index j = 0; j < m.kernels.cols(); ++j)
            m.kernels(c, j) = init.uniform(-kb, kb);
    m.conv_bias = Vector::Zero(conv.channels);
    const double hb = 1.0 / std::sqrt(static_cast<double>(conv.channels) * pos);
    m.head.resize(static_cast<Eigen::Index>(conv.channels) * pos);
    for (Eigen::Index j = 0; j < m.head.size(); ++j)
        m.head(j) = init.uniform(-hb, hb);
    m.head_bias = y.mean();

    out.epoch_loss = detail::adam_train(
        m, xs, y, spec,
        [](const ConvModel& cm, const Matrix& xb, const Vector& yb) {
            return detail::conv_loss_grad(cm, xb, yb);
        });

    out.fit = detail::effective_fit(
        m, [](const ConvModel& cm, const Matrix& x) { return conv_predict(cm, x); },
        out.scaler, X, y);
    return out;
}

inline FitResult train_linear(const Matrix& X, const Vector& y,
                              const TrainSpec& spec) {
    return train_linear_model(X, y, spec).fit;
}

inline FitResult train_conv(const Matrix& X, const Vector& y, int p, int k,
                            const TrainSpec& spec, const ConvSpec& conv = {}) {
    return train_conv_model(X, y, p, k, spec, conv).fit;
}

/// Weight audit format: layer,index,value.
inline void write_weights_csv(const std::string& path, const LinearModel& model) {
    std::ofstream out(path);
    if (!out)
        throw ParseError("cannot open for writing: " + path);
    out << "layer,index,value\n";
    for (Eigen::Index j = 0; j < model.weights.size(); ++j)
        out << "weights," << j << "," << format_double(model.weights(j)) << "\n";
    out << "bias,0," << format_double(model.bias) << "\n";
}

inline void write_weights_csv(const std::string& path, const ConvModel& model) {
    std::ofstream out(path);
    if (!out)
        throw ParseError("cannot open for writing: " + path);
    out << "layer,index,value\n";
    for (int c = 0; c < model.channels; ++c)
        for (Eigen::Index j = 0; j < model.kernels.cols(); ++j)
            out << "conv_kernel," << (c * model.kernels.cols() + j) << ","
                << format_double(model.kernels(c, j)) << "\n";
    for (Eigen::Index c = 0; c < model.conv_bias.size(); ++c)
        out << "conv_bias," << c << "," << format_double(model.conv_bias(c)) << "\n";
    for (Eigen::Index j = 0; j < model.head.size(); ++j)
        out << "head," << j << "," << format_double(model.head(j)) << "\n";
    out << "head_bias,0," << format_double(model.head_bias) << "\n";
}

} // namespace procml
