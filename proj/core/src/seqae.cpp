// SPDX-License-Identifier: Apache-2.0
#include "hpcsentry/seqae.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "hpcsentry/error.hpp"

namespace hpcsentry {
namespace {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

// Flat parameter layout (each block column-major):
//   enc_w 3H x D | enc_u 3H x H | enc_b 3H | dec_u 3H x H | dec_b 3H | out_w D x H | out_b D
// Gate rows are stacked [update z; reset r; candidate n].
struct Layout {
  std::size_t D, H;
  std::size_t enc_w, enc_u, enc_b, dec_u, dec_b, out_w, out_b, total;

  Layout(std::size_t d, std::size_t h) : D(d), H(h) {
    enc_w = 0;
    enc_u = enc_w + 3 * H * D;
    enc_b = enc_u + 3 * H * H;
    dec_u = enc_b + 3 * H;
    dec_b = dec_u + 3 * H * H;
    out_w = dec_b + 3 * H;
    out_b = out_w + D * H;
    total = out_b + D;
  }
};

template <typename Scalar>
struct Params {
  using MatMap = Eigen::Map<Eigen::Matrix<std::remove_const_t<Scalar>, Eigen::Dynamic, Eigen::Dynamic>>;
  using VecMap = Eigen::Map<Eigen::Matrix<std::remove_const_t<Scalar>, Eigen::Dynamic, 1>>;
  using CMatMap = std::conditional_t<std::is_const_v<Scalar>, Eigen::Map<const Mat>, MatMap>;
  using CVecMap = std::conditional_t<std::is_const_v<Scalar>, Eigen::Map<const Vec>, VecMap>;

  CMatMap enc_w, enc_u;
  CVecMap enc_b;
  CMatMap dec_u;
  CVecMap dec_b;
  CMatMap out_w;
  CVecMap out_b;

  Params(Scalar* base, const Layout& l)
      : enc_w(base + l.enc_w, 3 * l.H, l.D),
        enc_u(base + l.enc_u, 3 * l.H, l.H),
        enc_b(base + l.enc_b, 3 * l.H),
        dec_u(base + l.dec_u, 3 * l.H, l.H),
        dec_b(base + l.dec_b, 3 * l.H),
        out_w(base + l.out_w, l.D, l.H),
        out_b(base + l.out_b, l.D) {}
};

// Activations of one GRU layer over T steps.
struct LayerTape {
  Mat h;   // H x (T+1); column 0 is the initial state
  Mat z;   // H x T
  Mat r;   // H x T
  Mat n;   // H x T
  Mat rh;  // H x T, r (.) h_prev

  void resize(Eigen::Index H, Eigen::Index T) {
    h.resize(H, T + 1);
    z.resize(H, T);
    r.resize(H, T);
    n.resize(H, T);
    rh.resize(H, T);
  }
};

struct Tape {
  LayerTape enc, dec;
  Mat y;  // D x T
};

Vec sigmoid(const Vec& v) { return (1.0 + (-v.array()).exp()).inverse().matrix(); }

// Runs one GRU layer. `input_proj` holds W x_t + b per column (3H x T).
template <typename UMap>
void run_layer(const UMap& u, const Mat& input_proj, LayerTape& tape) {
  const Eigen::Index H = u.cols();
  const Eigen::Index T = input_proj.cols();
  Vec g(2 * H), zr(2 * H), rh(H), n(H);
  for (Eigen::Index t = 0; t < T; ++t) {
    const auto hp = tape.h.col(t);
    g.noalias() = input_proj.col(t).head(2 * H);
    g.noalias() += u.topRows(2 * H) * hp;
    zr = sigmoid(g);
    rh = zr.tail(H).cwiseProduct(hp);
    n = input_proj.col(t).tail(H);
    n.noalias() += u.bottomRows(H) * rh;
    n = n.array().tanh().matrix();
    tape.z.col(t) = zr.head(H);
    tape.r.col(t) = zr.tail(H);
    tape.n.col(t) = n;
    tape.rh.col(t) = rh;
    tape.h.col(t + 1) = (1.0 - zr.head(H).array()) * n.array() + zr.head(H).array() * hp.array();
  }
}

void forward(const Params<const double>& p, const Eigen::Map<const Mat>& x, Tape& tape) {
  const Eigen::Index H = p.enc_u.cols();
  const Eigen::Index T = x.cols();
  tape.enc.resize(H, T);
  tape.dec.resize(H, T);

  Mat proj = p.enc_w * x;
  proj.colwise() += p.enc_b;
  tape.enc.h.col(0).setZero();
  run_layer(p.enc_u, proj, tape.enc);

  proj = p.dec_b.replicate(1, T);
  tape.dec.h.col(0) = tape.enc.h.col(T);
  run_layer(p.dec_u, proj, tape.dec);

  tape.y.noalias() = p.out_w * tape.dec.h.rightCols(T);
  tape.y.colwise() += p.out_b;
}

// Backpropagates through one GRU layer. `dh_out` (H x T) is the loss gradient
// arriving at each output state h_1..h_T from outside the recurrence; `dh` is
// the gradient arriving at h_T from later layers and, on return, holds the
// gradient w.r.t. the initial state h_0. Gate pre-activation gradients are
// written into `da` (3H x T).
template <typename UMap, typename DUMap>
void backprop_layer(const UMap& u, const LayerTape& tape, const Mat* dh_out, Vec& dh, Mat& da, DUMap& du) {
  const Eigen::Index H = u.cols();
  const Eigen::Index T = tape.z.cols();
  da.resize(3 * H, T);
  Vec dn(H), dz(H), dan(H), drh(H), dzr(2 * H), dhp(H);
  for (Eigen::Index t = T - 1; t >= 0; --t) {
    if (dh_out != nullptr) dh += dh_out->col(t);
    const auto hp = tape.h.col(t);
    const auto z = tape.z.col(t);
    const auto r = tape.r.col(t);
    const auto n = tape.n.col(t);

    dn = dh.cwiseProduct((1.0 - z.array()).matrix());
    dz = dh.cwiseProduct(hp - n);
    dhp = dh.cwiseProduct(z);
    dan = dn.array() * (1.0 - n.array().square());
    drh.noalias() = u.bottomRows(H).transpose() * dan;
    dhp += drh.cwiseProduct(r);
    dzr.head(H) = dz.array() * z.array() * (1.0 - z.array());
    dzr.tail(H) = drh.array() * hp.array() * r.array() * (1.0 - r.array());
    dhp.noalias() += u.topRows(2 * H).transpose() * dzr;

    da.col(t).head(2 * H) = dzr;
    da.col(t).tail(H) = dan;
    dh = dhp;
  }
  du.topRows(2 * H).noalias() += da.topRows(2 * H) * tape.h.leftCols(T).transpose();
  du.bottomRows(H).noalias() += da.bottomRows(H) * tape.rh.transpose();
}

// Adds scale * d(loss)/d(params) for one window; returns the window's loss.
double accumulate(const Params<const double>& p, Params<double>& g, const Window& w, double scale) {
  const auto D = static_cast<Eigen::Index>(w.cols());
  const auto T = static_cast<Eigen::Index>(w.rows());
  const Eigen::Map<const Mat> x(w.values().data(), D, T);
  Tape tape;
  forward(p, x, tape);

  const double denom = static_cast<double>(D * T);
  const Mat diff = tape.y - x;
  const double loss = diff.squaredNorm() / denom;
  const Mat dy = diff * (2.0 * scale / denom);

  g.out_w.noalias() += dy * tape.dec.h.rightCols(T).transpose();
  g.out_b += dy.rowwise().sum();
  const Mat dh_dec = p.out_w.transpose() * dy;

  const Eigen::Index H = p.enc_u.cols();
  Vec dh = Vec::Zero(H);
  Mat da;
  backprop_layer(p.dec_u, tape.dec, &dh_dec, dh, da, g.dec_u);
  g.dec_b += da.rowwise().sum();

  backprop_layer(p.enc_u, tape.enc, nullptr, dh, da, g.enc_u);
  g.enc_b += da.rowwise().sum();
  g.enc_w.noalias() += da * x.transpose();
  return loss;
}

}  // namespace

SequenceAutoencoder::SequenceAutoencoder(std::size_t input_dim, std::size_t seq_len, std::size_t hidden_dim,
                                         std::uint64_t init_seed)
    : input_dim_(input_dim), seq_len_(seq_len), hidden_dim_(hidden_dim) {
  if (input_dim == 0 || seq_len == 0 || hidden_dim == 0) {
    throw Error(ErrorCode::InvalidArgument, "autoencoder dimensions must be positive");
  }
  const Layout l(input_dim, hidden_dim);
  params_.assign(l.total, 0.0);
  std::mt19937_64 rng(init_seed);
  const double k = 1.0 / std::sqrt(static_cast<double>(hidden_dim));
  std::uniform_real_distribution<double> dist(-k, k);
  for (std::size_t i = l.enc_w; i < l.enc_b; ++i) params_[i] = dist(rng);
  for (std::size_t i = l.dec_u; i < l.dec_b; ++i) params_[i] = dist(rng);
}

bool SequenceAutoencoder::parameters_finite() const noexcept {
  return std::all_of(params_.begin(), params_.end(), [](double v) { return std::isfinite(v); });
}

void SequenceAutoencoder::check_shape(const Window& window) const {
  if (window.rows() != seq_len_ || window.cols() != input_dim_) {
    throw Error(ErrorCode::ShapeMismatch, "model expects " + std::to_string(seq_len_) + "x" +
                                              std::to_string(input_dim_) + ", got " +
                                              std::to_string(window.rows()) + "x" + std::to_string(window.cols()));
  }
}

Window SequenceAutoencoder::reconstruct(const Window& window) const {
  check_shape(window);
  const Layout l(input_dim_, hidden_dim_);
  const Params<const double> p(params_.data(), l);
  const Eigen::Map<const Mat> x(window.values().data(), static_cast<Eigen::Index>(input_dim_),
                                static_cast<Eigen::Index>(seq_len_));
  Tape tape;
  forward(p, x, tape);
  // D x T column-major is T x D row-major.
  return Window(window.start_tick(), seq_len_, input_dim_,
                std::vector<double>(tape.y.data(), tape.y.data() + tape.y.size()));
}

std::vector<double> SequenceAutoencoder::encode(const Window& window) const {
  check_shape(window);
  const Layout l(input_dim_, hidden_dim_);
  const Params<const double> p(params_.data(), l);
  const Eigen::Map<const Mat> x(window.values().data(), static_cast<Eigen::Index>(input_dim_),
                                static_cast<Eigen::Index>(seq_len_));
  Tape tape;
  forward(p, x, tape);
  const auto f = tape.enc.h.col(static_cast<Eigen::Index>(seq_len_));
  return std::vector<double>(f.data(), f.data() + f.size());
}

double SequenceAutoencoder::reconstruction_error(const Window& window) const {
  return mean_squared_difference(window, reconstruct(window));
}

double SequenceAutoencoder::loss_and_gradient(std::span<const Window> batch, std::vector<double>& grad) const {
  const Layout l(input_dim_, hidden_dim_);
  grad.assign(l.total, 0.0);
  if (batch.empty()) return 0.0;
  const Params<const double> p(params_.data(), l);
  Params<double> g(grad.data(), l);
  const double scale = 1.0 / static_cast<double>(batch.size());
  double total = 0.0;
  for (const auto& w : batch) {
    check_shape(w);
    total += accumulate(p, g, w, scale);
  }
  return total * scale;
}

double mean_squared_difference(const Window& a, const Window& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw Error(ErrorCode::ShapeMismatch, "blocks differ in shape");
  }
  const auto va = a.values();
  const auto vb = b.values();
  if (va.empty()) return 0.0;
  double sum = 0.0;
  for (std::size_t i = 0; i < va.size(); ++i) {
    const double d = va[i] - vb[i];
    sum += d * d;
  }
  return sum / static_cast<double>(va.size());
}

double reconstruction_error(const SequenceAutoencoder& model, const Window& window) {
  return model.reconstruction_error(window);
}

SequenceAutoencoder train(std::span<const Window> windows, const TrainingConfig& config, std::size_t hidden_dim,
                          TrainingReport* report) {
  if (windows.empty()) throw Error(ErrorCode::EmptyTrainingSet, "no training windows");
  if (config.batch_size == 0) throw Error(ErrorCode::InvalidArgument, "batch_size must be >= 1");
  const std::size_t rows = windows.front().rows();
  const std::size_t cols = windows.front().cols();
  for (const auto& w : windows) {
    if (w.rows() != rows || w.cols() != cols) throw Error(ErrorCode::ShapeMismatch, "training windows differ in shape");
  }

  SequenceAutoencoder model(cols, rows, hidden_dim, config.seed);
  model.training_config = config;

  auto mean_error = [&] {
    double s = 0.0;
    for (const auto& w : windows) s += model.reconstruction_error(w);
    return s / static_cast<double>(windows.size());
  };
  TrainingReport local;
  local.initial_error = mean_error();

  const Layout l(cols, hidden_dim);
  std::vector<double> grad(l.total, 0.0);
  std::vector<std::size_t> order(windows.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(config.seed ^ 0xA5A5A5A5A5A5A5A5ULL);

  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t end = std::min(order.size(), start + config.batch_size);
      std::fill(grad.begin(), grad.end(), 0.0);
      const Params<const double> p(model.parameters().data(), l);
      Params<double> g(grad.data(), l);
      const double scale = 1.0 / static_cast<double>(end - start);
      double batch_loss = 0.0;
      for (std::size_t i = start; i < end; ++i) batch_loss += accumulate(p, g, windows[order[i]], scale);
      if (!std::isfinite(batch_loss)) {
        throw Error(ErrorCode::DivergedTraining, "non-finite loss in epoch " + std::to_string(epoch));
      }
      epoch_loss += batch_loss;

      double norm2 = 0.0;
      for (double v : grad) norm2 += v * v;
      const double norm = std::sqrt(norm2);
      if (!std::isfinite(norm)) {
        throw Error(ErrorCode::DivergedTraining, "non-finite gradient in epoch " + std::to_string(epoch));
      }
      const double clip = (config.gradient_clip > 0.0 && norm > config.gradient_clip) ? config.gradient_clip / norm : 1.0;
      auto params = model.parameters();
      for (std::size_t i = 0; i < params.size(); ++i) params[i] -= config.learning_rate * clip * grad[i];
    }
    local.epoch_loss.push_back(epoch_loss / static_cast<double>(order.size()));
  }

  if (!model.parameters_finite()) throw Error(ErrorCode::DivergedTraining, "parameters became non-finite");
  local.final_error = mean_error();
  if (!std::isfinite(local.final_error)) throw Error(ErrorCode::DivergedTraining, "non-finite final error");
  if (report != nullptr) *report = std::move(local);
  return model;
}

ThresholdCalibration make_calibration(double mu, double sigma) noexcept {
  return ThresholdCalibration{mu, sigma, mu + kSigmaMultiplier * sigma};
}

ThresholdCalibration calibrate_threshold(std::span<const double> errors) {
  if (errors.size() < 2) throw Error(ErrorCode::InsufficientSamples, "need at least two errors");
  const double n = static_cast<double>(errors.size());
  double sum = 0.0;
  for (double e : errors) sum += e;
  const double mu = sum / n;
  double ss = 0.0;
  for (double e : errors) ss += (e - mu) * (e - mu);
  return make_calibration(mu, std::sqrt(ss / n));
}

std::vector<WindowScore> score_stream(const SequenceAutoencoder& model, const ThresholdCalibration& calibration,
                                      std::span<const Window> windows) {
  std::vector<WindowScore> out;
  out.reserve(windows.size());
  for (std::size_t i = 0; i < windows.size(); ++i) {
    const double e = model.reconstruction_error(windows[i]);
    out.push_back(WindowScore{i, e, e > calibration.threshold});
  }
  return out;
}

}  // namespace hpcsentry
