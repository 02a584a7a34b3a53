#include "mapomdp/pi/classifier.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <numeric>
#include <random>
#include <stdexcept>

#include "mapomdp/core/rng.hpp"
#include "mapomdp/simd/kernels.hpp"

namespace mapomdp::pi {

static_assert(std::endian::native == std::endian::little, "classifier files are little-endian");

namespace {

constexpr char kMagic[4] = {'M', 'A', 'P', 'C'};
constexpr std::uint32_t kVersion = 1;

void softmax_in_place(std::span<double> v) {
  const double top = *std::max_element(v.begin(), v.end());
  double total = 0.0;
  for (double& x : v) total += (x = std::exp(x - top));
  for (double& x : v) x /= total;
}

template <class T>
void put(std::ostream& out, const T& value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <class T>
T get(std::istream& in) {
  T value;
  if (!in.read(reinterpret_cast<char*>(&value), sizeof(T)))
    throw std::runtime_error("classifier file is truncated");
  return value;
}

void put_doubles(std::ostream& out, std::span<const double> v) {
  out.write(reinterpret_cast<const char*>(v.data()), static_cast<std::streamsize>(v.size_bytes()));
}

void get_doubles(std::istream& in, std::span<double> v) {
  if (!in.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(v.size_bytes())))
    throw std::runtime_error("classifier file is truncated");
}

}  // namespace

std::size_t argmax(std::span<const double> v) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < v.size(); ++i)
    if (v[i] > v[best]) best = i;
  return best;
}

void Dataset::add(std::span<const double> x, int label) {
  if (x.size() != dim) throw std::invalid_argument("Dataset: feature dimension mismatch");
  features.insert(features.end(), x.begin(), x.end());
  labels.push_back(label);
}

void Dataset::append(const Dataset& other) {
  if (other.dim != dim) throw std::invalid_argument("Dataset: feature dimension mismatch");
  features.insert(features.end(), other.features.begin(), other.features.end());
  labels.insert(labels.end(), other.labels.begin(), other.labels.end());
}

void PolicyClassifier::layout() {
  if (shape_.input <= 0 || shape_.output <= 0 || shape_.hidden.empty())
    throw std::invalid_argument("PolicyClassifier: needs input, output and at least one hidden layer");
  for (int h : shape_.hidden)
    if (h <= 0) throw std::invalid_argument("PolicyClassifier: hidden sizes must be positive");
  dense_.clear();
  std::size_t offset = 0;
  std::size_t in = shape_.input;
  auto add = [&](std::size_t out) {
    dense_.push_back({in, out, offset, offset + in * out});
    offset += in * out + out;
    in = out;
  };
  for (int h : shape_.hidden) add(h);
  const std::size_t h = in;
  gamma_ = offset;
  beta_ = offset + h;
  offset += 2 * h;
  add(shape_.output);
  params_.assign(offset, 0.0);
  running_mean_.assign(h, 0.0);
  running_var_.assign(h, 1.0);
}

PolicyClassifier::PolicyClassifier(ClassifierShape shape, std::uint64_t seed) : shape_(std::move(shape)) {
  layout();
  Rng rng = make_rng(seed);
  for (const Dense& d : dense_) {
    std::normal_distribution<double> normal(0.0, std::sqrt(2.0 / static_cast<double>(d.in)));
    for (std::size_t i = 0; i < d.in * d.out; ++i) params_[d.weights + i] = normal(rng);
  }
  std::fill_n(params_.begin() + gamma_, running_mean_.size(), 1.0);
}

std::vector<double> PolicyClassifier::logits(std::span<const double> x) const {
  if (static_cast<int>(x.size()) != shape_.input)
    throw std::invalid_argument("PolicyClassifier: input dimension mismatch");
  const auto& k = simd::active();
  std::vector<double> a(x.begin(), x.end());
  std::vector<double> next;
  for (std::size_t l = 0; l + 1 < dense_.size(); ++l) {
    const Dense& d = dense_[l];
    next.resize(d.out);
    k.gemv(&params_[d.weights], a.data(), &params_[d.bias], next.data(), d.out, d.in);
    for (double& v : next) v = std::max(v, 0.0);
    a.swap(next);
  }
  for (std::size_t j = 0; j < a.size(); ++j) {
    const double xhat = (a[j] - running_mean_[j]) / std::sqrt(running_var_[j] + kBatchNormEps);
    a[j] = params_[gamma_ + j] * xhat + params_[beta_ + j];
  }
  const Dense& o = dense_.back();
  std::vector<double> out(o.out);
  k.gemv(&params_[o.weights], a.data(), &params_[o.bias], out.data(), o.out, o.in);
  return out;
}

std::vector<double> PolicyClassifier::predict_proba(std::span<const double> x) const {
  auto p = logits(x);
  softmax_in_place(p);
  return p;
}

double PolicyClassifier::loss(const Dataset& data, std::span<const std::size_t> rows, bool training,
                              std::vector<double>* grad, BatchStats* stats) const {
  const auto& k = simd::active();
  const std::size_t n = rows.size();
  if (n == 0) throw std::invalid_argument("PolicyClassifier: empty batch");
  if (data.dim != static_cast<std::size_t>(shape_.input))
    throw std::invalid_argument("PolicyClassifier: dataset dimension mismatch");
  const std::size_t hidden_layers = dense_.size() - 1;

  // act[0] is the input batch, act[l + 1] the ReLU output of hidden layer l.
  std::vector<std::vector<double>> act(hidden_layers + 1);
  act[0].resize(n * data.dim);
  for (std::size_t i = 0; i < n; ++i) {
    const auto r = data.row(rows[i]);
    std::copy(r.begin(), r.end(), act[0].begin() + i * data.dim);
  }
  for (std::size_t l = 0; l < hidden_layers; ++l) {
    const Dense& d = dense_[l];
    act[l + 1].resize(n * d.out);
    for (std::size_t i = 0; i < n; ++i)
      k.gemv(&params_[d.weights], &act[l][i * d.in], &params_[d.bias], &act[l + 1][i * d.out], d.out, d.in);
    for (double& v : act[l + 1]) v = std::max(v, 0.0);
  }

  const std::size_t h = running_mean_.size();
  const std::vector<double>& x = act[hidden_layers];
  std::vector<double> mean(h, 0.0), var(h, 0.0);
  if (training) {
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < h; ++j) mean[j] += x[i * h + j];
    for (double& m : mean) m /= static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < h; ++j) {
        const double c = x[i * h + j] - mean[j];
        var[j] += c * c;
      }
    for (double& v : var) v /= static_cast<double>(n);
    if (stats) *stats = {mean, var};
  } else {
    mean = running_mean_;
    var = running_var_;
  }
  std::vector<double> inv_std(h);
  for (std::size_t j = 0; j < h; ++j) inv_std[j] = 1.0 / std::sqrt(var[j] + kBatchNormEps);
  std::vector<double> xhat(n * h), y(n * h);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < h; ++j) {
      xhat[i * h + j] = (x[i * h + j] - mean[j]) * inv_std[j];
      y[i * h + j] = params_[gamma_ + j] * xhat[i * h + j] + params_[beta_ + j];
    }

  const Dense& o = dense_.back();
  std::vector<double> prob(n * o.out);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    std::span<double> p(&prob[i * o.out], o.out);
    k.gemv(&params_[o.weights], &y[i * h], &params_[o.bias], p.data(), o.out, o.in);
    softmax_in_place(p);
    const int label = data.labels[rows[i]];
    if (label < 0 || label >= shape_.output) throw std::invalid_argument("PolicyClassifier: label out of range");
    total -= std::log(std::max(p[label], 1e-300));
  }
  const double value = total / static_cast<double>(n);
  if (!grad) return value;

  std::vector<double>& g = *grad;
  g.assign(params_.size(), 0.0);
  const double inv_n = 1.0 / static_cast<double>(n);

  // Output layer.
  std::vector<double> dy(n * h, 0.0);
  std::vector<double> dlogit(o.out);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t c = 0; c < o.out; ++c) dlogit[c] = prob[i * o.out + c] * inv_n;
    dlogit[data.labels[rows[i]]] -= inv_n;
    k.rank1(&g[o.weights], 1.0, dlogit.data(), &y[i * h], o.out, o.in);
    k.axpy(1.0, dlogit.data(), &g[o.bias], o.out);
    k.gemv_t_acc(&params_[o.weights], dlogit.data(), &dy[i * h], o.out, o.in);
  }

  // Normalization.
  std::vector<double> da(n * h);
  for (std::size_t j = 0; j < h; ++j) {
    double sum_dxhat = 0.0, sum_dxhat_xhat = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double d = dy[i * h + j];
      g[gamma_ + j] += d * xhat[i * h + j];
      g[beta_ + j] += d;
      const double dxhat = d * params_[gamma_ + j];
      sum_dxhat += dxhat;
      sum_dxhat_xhat += dxhat * xhat[i * h + j];
    }
    for (std::size_t i = 0; i < n; ++i) {
      const double dxhat = dy[i * h + j] * params_[gamma_ + j];
      da[i * h + j] = training ? inv_std[j] * inv_n *
                                     (static_cast<double>(n) * dxhat - sum_dxhat -
                                      xhat[i * h + j] * sum_dxhat_xhat)
                               : dxhat * inv_std[j];
    }
  }

  // Hidden layers, last to first.
  for (std::size_t l = hidden_layers; l-- > 0;) {
    const Dense& d = dense_[l];
    for (std::size_t i = 0; i < n * d.out; ++i)
      if (act[l + 1][i] <= 0.0) da[i] = 0.0;
    std::vector<double> prev(l > 0 ? n * d.in : 0, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      k.rank1(&g[d.weights], 1.0, &da[i * d.out], &act[l][i * d.in], d.out, d.in);
      k.axpy(1.0, &da[i * d.out], &g[d.bias], d.out);
      if (l > 0) k.gemv_t_acc(&params_[d.weights], &da[i * d.out], &prev[i * d.in], d.out, d.in);
    }
    da.swap(prev);
  }
  return value;
}

double PolicyClassifier::accuracy(const Dataset& data) const {
  if (data.size() == 0) return 0.0;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < data.size(); ++i)
    hits += static_cast<int>(argmax(logits(data.row(i)))) == data.labels[i];
  return static_cast<double>(hits) / static_cast<double>(data.size());
}

TrainReport PolicyClassifier::train(const Dataset& data, const TrainConfig& cfg, std::uint64_t seed) {
  if (data.size() == 0) throw std::invalid_argument("train: no samples");
  if (cfg.batch_size < 1 || cfg.epochs < 1) throw std::invalid_argument("train: bad batch size or epochs");
  TrainReport report;
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> square(params_.size(), 0.0);
  std::vector<double> grad;
  BatchStats stats;
  double best = std::numeric_limits<double>::infinity();
  int stale = 0;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    Rng rng = make_rng(derive_seed(seed, {key(Stream::kTraining), static_cast<std::uint64_t>(epoch)}));
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[uniform_index(rng, i)]);
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(cfg.batch_size));
      const std::span<const std::size_t> batch(order.data() + start, end - start);
      epoch_loss += loss(data, batch, true, &grad, &stats) * static_cast<double>(batch.size());
      for (std::size_t p = 0; p < params_.size(); ++p) {
        square[p] = cfg.decay * square[p] + (1.0 - cfg.decay) * grad[p] * grad[p];
        params_[p] -= cfg.learning_rate * grad[p] / (std::sqrt(square[p]) + cfg.epsilon);
      }
      for (std::size_t j = 0; j < running_mean_.size(); ++j) {
        running_mean_[j] = cfg.bn_momentum * running_mean_[j] + (1.0 - cfg.bn_momentum) * stats.mean[j];
        running_var_[j] = cfg.bn_momentum * running_var_[j] + (1.0 - cfg.bn_momentum) * stats.var[j];
      }
    }
    epoch_loss /= static_cast<double>(order.size());
    report.epoch_loss.push_back(epoch_loss);
    report.epochs_run = epoch + 1;
    if (epoch_loss < best - cfg.min_improvement) {
      best = epoch_loss;
      stale = 0;
    } else if (++stale >= cfg.patience) {
      break;
    }
  }
  train_accuracy_ = report.train_accuracy = accuracy(data);
  return report;
}

void PolicyClassifier::write(std::ostream& out) const {
  out.write(kMagic, 4);
  put(out, kVersion);
  const std::uint32_t dims = static_cast<std::uint32_t>(shape_.hidden.size() + 2);
  put(out, dims);
  put(out, static_cast<std::uint32_t>(shape_.input));
  for (int h : shape_.hidden) put(out, static_cast<std::uint32_t>(h));
  put(out, static_cast<std::uint32_t>(shape_.output));
  put(out, kBatchNormEps);
  put_doubles(out, params_);
  put_doubles(out, running_mean_);
  put_doubles(out, running_var_);
  put(out, train_accuracy_);
  if (!out) throw std::runtime_error("classifier write failed");
}

PolicyClassifier PolicyClassifier::read(std::istream& in) {
  char magic[4];
  if (!in.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0)
    throw std::runtime_error("not a classifier file (bad magic)");
  if (get<std::uint32_t>(in) != kVersion) throw std::runtime_error("unsupported classifier version");
  const std::uint32_t dims = get<std::uint32_t>(in);
  if (dims < 3 || dims > 64) throw std::runtime_error("classifier file has bad layer count");
  PolicyClassifier c;
  c.shape_.input = static_cast<int>(get<std::uint32_t>(in));
  c.shape_.hidden.clear();
  for (std::uint32_t i = 0; i + 2 < dims; ++i) c.shape_.hidden.push_back(static_cast<int>(get<std::uint32_t>(in)));
  c.shape_.output = static_cast<int>(get<std::uint32_t>(in));
  if (get<double>(in) != kBatchNormEps) throw std::runtime_error("classifier file has a different normalization epsilon");
  c.layout();
  get_doubles(in, c.params_);
  get_doubles(in, c.running_mean_);
  get_doubles(in, c.running_var_);
  c.train_accuracy_ = get<double>(in);
  return c;
}

void PolicyClassifier::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  write(out);
}

PolicyClassifier PolicyClassifier::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  return read(in);
}

nlohmann::json PolicyClassifier::to_json() const {
  nlohmann::json layers = nlohmann::json::array();
  for (const Dense& d : dense_) {
    nlohmann::json w = nlohmann::json::array();
    for (std::size_t r = 0; r < d.out; ++r)
      w.push_back(std::vector<double>(params_.begin() + d.weights + r * d.in,
                                      params_.begin() + d.weights + (r + 1) * d.in));
    layers.push_back({{"in", d.in},
                      {"out", d.out},
                      {"weights", std::move(w)},
                      {"bias", std::vector<double>(params_.begin() + d.bias, params_.begin() + d.bias + d.out)}});
  }
  const std::size_t h = running_mean_.size();
  std::vector<int> dims{shape_.input};
  dims.insert(dims.end(), shape_.hidden.begin(), shape_.hidden.end());
  dims.push_back(shape_.output);
  return {{"format", "mapomdp-classifier"},
          {"version", kVersion},
          {"dims", dims},
          {"activation", "relu"},
          {"layers", std::move(layers)},
          {"batch_norm",
           {{"after_hidden_layer", shape_.hidden.size() - 1},
            {"eps", kBatchNormEps},
            {"gamma", std::vector<double>(params_.begin() + gamma_, params_.begin() + gamma_ + h)},
            {"beta", std::vector<double>(params_.begin() + beta_, params_.begin() + beta_ + h)},
            {"running_mean", running_mean_},
            {"running_var", running_var_}}},
          {"train_accuracy", train_accuracy_}};
}

}  // namespace mapomdp::pi
