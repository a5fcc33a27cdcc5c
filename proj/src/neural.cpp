#include "graphpinn/neural.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <istream>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>

#include "graphpinn/error.hpp"

namespace graphpinn {

namespace {

// Column layout of every layer matrix: channel-major blocks of `batch` columns,
// channel 0 = value, 1 = d/dx, 2 = d2/dx2, 3 = d/dt (time-dependent inputs only).
enum Channel { kValue = 0, kDx = 1, kDxx = 2, kDt = 3 };

struct Mat {
  int rows = 0;
  std::size_t cols = 0;
  std::vector<double> v;

  void resize(int r, std::size_t c) {
    rows = r;
    cols = c;
    v.resize(static_cast<std::size_t>(r) * c);
  }
  double* row(int r) { return v.data() + static_cast<std::size_t>(r) * cols; }
  const double* row(int r) const { return v.data() + static_cast<std::size_t>(r) * cols; }
};

struct ActEval {
  double v, d1, d2, d3;
};

template <Activation K>
inline ActEval eval_activation(double z) {
  if constexpr (K == Activation::SinSq || K == Activation::SinSqPlusX) {
    const double s = std::sin(z);
    const double c = std::cos(z);
    // sin^2, sin 2z, 2 cos 2z, -4 sin 2z
    const double sc = s * c;
    ActEval e{s * s, 2.0 * sc, 2.0 * (c * c - s * s), -8.0 * sc};
    if constexpr (K == Activation::SinSqPlusX) {
      e.v += z;
      e.d1 += 1.0;
    }
    return e;
  } else if constexpr (K == Activation::Sigmoid) {
    double s;
    if (z >= 0.0) {
      s = 1.0 / (1.0 + std::exp(-z));
    } else {
      const double ez = std::exp(z);
      s = ez / (1.0 + ez);
    }
    const double d1 = s * (1.0 - s);
    return {s, d1, d1 * (1.0 - 2.0 * s), d1 * (1.0 - 6.0 * s + 6.0 * s * s)};
  } else {
    return {z > 0.0 ? z : 0.0, z > 0.0 ? 1.0 : 0.0, 0.0, 0.0};
  }
}

template <class Fn>
decltype(auto) dispatch(Activation a, Fn&& fn) {
  switch (a) {
    case Activation::Relu:
      return fn.template operator()<Activation::Relu>();
    case Activation::Sigmoid:
      return fn.template operator()<Activation::Sigmoid>();
    case Activation::SinSq:
      return fn.template operator()<Activation::SinSq>();
    case Activation::SinSqPlusX:
      return fn.template operator()<Activation::SinSqPlusX>();
  }
  throw std::logic_error("unknown activation");
}

using v8 = double __attribute__((vector_size(64)));
using v8u = double __attribute__((vector_size(64), aligned(8), __may_alias__));

inline v8 load8(const double* p) { return *reinterpret_cast<const v8u*>(p); }
inline void store8(double* p, v8 v) { *reinterpret_cast<v8u*>(p) = v; }
inline v8 splat(double x) { return v8{x, x, x, x, x, x, x, x}; }
inline double hsum(v8 v) { return ((v[0] + v[1]) + (v[2] + v[3])) + ((v[4] + v[5]) + (v[6] + v[7])); }

// Z = C A where C(i, k) = coef[i * rs + k * cs]. Each output element is
// accumulated as C(i,0) A(0,c) + C(i,1) A(1,c) + ... in that order, whatever
// the tile or column count, so a column's result never depends on its neighbours.
void coef_times(const double* coef, std::size_t rs, std::size_t cs, int out, int in, const Mat& A, Mat& Z) {
  const std::size_t n = A.cols;
  Z.resize(out, n);
  auto C = [&](int i, int k) { return coef[static_cast<std::size_t>(i) * rs + static_cast<std::size_t>(k) * cs]; };
  constexpr int R = 8;
  std::size_t c = 0;
  for (; c + 8 <= n; c += 8) {
    int i = 0;
    for (; i + R <= out; i += R) {
      v8 acc[R];
      const v8 a0 = load8(A.row(0) + c);
      for (int r = 0; r < R; ++r) acc[r] = splat(C(i + r, 0)) * a0;
      for (int k = 1; k < in; ++k) {
        const v8 a = load8(A.row(k) + c);
        for (int r = 0; r < R; ++r) acc[r] += splat(C(i + r, k)) * a;
      }
      for (int r = 0; r < R; ++r) store8(Z.row(i + r) + c, acc[r]);
    }
    for (; i < out; ++i) {
      v8 acc = splat(C(i, 0)) * load8(A.row(0) + c);
      for (int k = 1; k < in; ++k) acc += splat(C(i, k)) * load8(A.row(k) + c);
      store8(Z.row(i) + c, acc);
    }
  }
  for (; c < n; ++c)
    for (int i = 0; i < out; ++i) {
      double acc = C(i, 0) * A.row(0)[c];
      for (int k = 1; k < in; ++k) acc += C(i, k) * A.row(k)[c];
      Z.row(i)[c] = acc;
    }
}

// Z = W A, plus the bias on value columns only.
void affine_forward(const double* W, const double* b, int out, int in, const Mat& A, std::size_t batch, Mat& Z) {
  coef_times(W, static_cast<std::size_t>(in), 1, out, in, A, Z);
  for (int i = 0; i < out; ++i) {
    double* z = Z.row(i);
    const double bi = b[i];
    for (std::size_t c = 0; c < batch; ++c) z[c] += bi;
  }
}

double row_sum(const double* a, std::size_t n) {
  v8 acc = splat(0.0);
  std::size_t c = 0;
  for (; c + 8 <= n; c += 8) acc += load8(a + c);
  double s = hsum(acc);
  for (; c < n; ++c) s += a[c];
  return s;
}

// dW += Zb A^T (row-major out x in).
void outer_accumulate(const Mat& Zb, const Mat& A, double* dW) {
  const int out = Zb.rows;
  const int in = A.rows;
  const std::size_t n = A.cols;
  const std::size_t n8 = n - n % 8;
  auto tail = [&](int i, int k) {
    double s = 0.0;
    for (std::size_t c = n8; c < n; ++c) s += Zb.row(i)[c] * A.row(k)[c];
    return s;
  };
  int i = 0;
  for (; i + 4 <= out; i += 4) {
    int k = 0;
    for (; k + 4 <= in; k += 4) {
      v8 acc[4][4];
      for (auto& row : acc)
        for (auto& v : row) v = splat(0.0);
      for (std::size_t c = 0; c < n8; c += 8) {
        v8 z[4], a[4];
        for (int r = 0; r < 4; ++r) z[r] = load8(Zb.row(i + r) + c);
        for (int q = 0; q < 4; ++q) a[q] = load8(A.row(k + q) + c);
        for (int r = 0; r < 4; ++r)
          for (int q = 0; q < 4; ++q) acc[r][q] += z[r] * a[q];
      }
      for (int r = 0; r < 4; ++r)
        for (int q = 0; q < 4; ++q)
          dW[static_cast<std::size_t>(i + r) * static_cast<std::size_t>(in) + static_cast<std::size_t>(k + q)] +=
              hsum(acc[r][q]) + tail(i + r, k + q);
    }
    for (; k < in; ++k)
      for (int r = 0; r < 4; ++r) {
        v8 acc = splat(0.0);
        for (std::size_t c = 0; c < n8; c += 8) acc += load8(Zb.row(i + r) + c) * load8(A.row(k) + c);
        dW[static_cast<std::size_t>(i + r) * static_cast<std::size_t>(in) + static_cast<std::size_t>(k)] +=
            hsum(acc) + tail(i + r, k);
      }
  }
  for (; i < out; ++i)
    for (int k = 0; k < in; ++k) {
      v8 acc = splat(0.0);
      for (std::size_t c = 0; c < n8; c += 8) acc += load8(Zb.row(i) + c) * load8(A.row(k) + c);
      dW[static_cast<std::size_t>(i) * static_cast<std::size_t>(in) + static_cast<std::size_t>(k)] +=
          hsum(acc) + tail(i, k);
    }
}

// dW += Zb A^T, db += row sums of Zb over value columns, and optionally Ab = W^T Zb.
void affine_backward(const double* W, int out, int in, const Mat& A, const Mat& Zb, std::size_t batch,
                     double* dW, double* db, Mat* Ab) {
  outer_accumulate(Zb, A, dW);
  for (int i = 0; i < out; ++i) db[i] += row_sum(Zb.row(i), batch);
  if (Ab) coef_times(W, 1, static_cast<std::size_t>(in), in, out, Zb, *Ab);
}

template <Activation K>
void activation_forward_impl(const Mat& Z, std::size_t batch, int channels, Mat& A, Mat* s1, Mat* s2, Mat* s3) {
  A.resize(Z.rows, Z.cols);
  if (s1) {
    s1->resize(Z.rows, batch);
    s2->resize(Z.rows, batch);
    s3->resize(Z.rows, batch);
  }
  for (int r = 0; r < Z.rows; ++r) {
    const double* z = Z.row(r);
    double* a = A.row(r);
    for (std::size_t s = 0; s < batch; ++s) {
      const ActEval e = eval_activation<K>(z[s]);
      a[s] = e.v;
      if (channels == 1) continue;
      const double zx = z[kDx * batch + s];
      const double zxx = z[kDxx * batch + s];
      a[kDx * batch + s] = e.d1 * zx;
      a[kDxx * batch + s] = e.d2 * zx * zx + e.d1 * zxx;
      if (channels == 4) a[kDt * batch + s] = e.d1 * z[kDt * batch + s];
      if (s1) {
        s1->row(r)[s] = e.d1;
        s2->row(r)[s] = e.d2;
        s3->row(r)[s] = e.d3;
      }
    }
  }
}

// Reverse of activation_forward_impl for jet channels.
void activation_backward(const Mat& Z, const Mat& Ab, const Mat& s1, const Mat& s2, const Mat& s3, std::size_t batch,
                         int channels, Mat& Zb) {
  Zb.resize(Z.rows, Z.cols);
  for (int r = 0; r < Z.rows; ++r) {
    const double* z = Z.row(r);
    const double* ab = Ab.row(r);
    const double* d1 = s1.row(r);
    const double* d2 = s2.row(r);
    const double* d3 = s3.row(r);
    double* zb = Zb.row(r);
    for (std::size_t s = 0; s < batch; ++s) {
      const double zx = z[kDx * batch + s];
      const double zxx = z[kDxx * batch + s];
      const double a0 = ab[s];
      const double ax = ab[kDx * batch + s];
      const double axx = ab[kDxx * batch + s];
      double v = a0 * d1[s] + ax * d2[s] * zx + axx * (d3[s] * zx * zx + d2[s] * zxx);
      if (channels == 4) {
        const double at = ab[kDt * batch + s];
        v += at * d2[s] * z[kDt * batch + s];
        zb[kDt * batch + s] = at * d1[s];
      }
      zb[s] = v;
      zb[kDx * batch + s] = ax * d1[s] + axx * 2.0 * d2[s] * zx;
      zb[kDxx * batch + s] = axx * d1[s];
    }
  }
}

void make_input(const Mlp& m, const InputBatch& in, int channels, Mat& A) {
  const int arity = m.input_arity();
  const std::size_t batch = in.size();
  if (arity == 2 && in.t.size() != batch)
    throw std::invalid_argument("input batch needs one t per x for a two-input network");
  if (arity != 1 && arity != 2) throw std::invalid_argument("networks take one (x) or two (x, t) inputs");
  A.resize(arity, batch * static_cast<std::size_t>(channels));
  std::fill(A.v.begin(), A.v.end(), 0.0);
  double* xr = A.row(0);
  for (std::size_t s = 0; s < batch; ++s) {
    xr[s] = in.x[s];
    if (channels > 1) xr[kDx * batch + s] = 1.0;
  }
  if (arity == 2) {
    double* tr = A.row(1);
    for (std::size_t s = 0; s < batch; ++s) {
      tr[s] = in.t[s];
      if (channels == 4) tr[kDt * batch + s] = 1.0;
    }
  }
}

}  // namespace

// Buffers are kept between passes so repeated evaluations reuse their memory.
struct JetCache::Impl {
  const Mlp* owner = nullptr;
  std::size_t batch = 0;
  int channels = 0;
  std::vector<Mat> inputs;  // input matrix of each layer
  std::vector<Mat> pre;     // pre-activations of hidden layers
  std::vector<Mat> s1, s2, s3;
  Mat out;
  Mat grad_a, grad_b;  // reverse-pass scratch
};

JetCache::JetCache() = default;
JetCache::~JetCache() = default;
JetCache::JetCache(JetCache&&) noexcept = default;
JetCache& JetCache::operator=(JetCache&&) noexcept = default;

namespace {

// Shared forward pass; channels == 1 evaluates values only. The network output
// lands in ws.out (row 0).
void run_forward(const Mlp& m, const InputBatch& in, int channels, JetCache::Impl& ws) {
  const std::size_t batch = in.size();
  const auto& dims = m.dims();
  const auto layers = static_cast<std::size_t>(m.num_layers());
  const double* p = m.parameters().data();

  ws.owner = &m;
  ws.batch = batch;
  ws.channels = channels;
  ws.inputs.resize(layers);
  ws.pre.resize(layers - 1);
  ws.s1.resize(layers - 1);
  ws.s2.resize(layers - 1);
  ws.s3.resize(layers - 1);

  make_input(m, in, channels, ws.inputs[0]);
  for (std::size_t l = 0; l < layers; ++l) {
    const int li = static_cast<int>(l);
    Mat& Z = l + 1 == layers ? ws.out : ws.pre[l];
    affine_forward(p + m.weight_offset(li), p + m.bias_offset(li), dims[l + 1], dims[l], ws.inputs[l], batch, Z);
    if (l + 1 == layers) break;
    Mat* s1 = channels > 1 ? &ws.s1[l] : nullptr;
    Mat* s2 = channels > 1 ? &ws.s2[l] : nullptr;
    Mat* s3 = channels > 1 ? &ws.s3[l] : nullptr;
    Mat& next = ws.inputs[l + 1];
    dispatch(m.activation(), [&]<Activation K>() { activation_forward_impl<K>(Z, batch, channels, next, s1, s2, s3); });
  }
}

}  // namespace

std::string_view to_string(Activation a) {
  switch (a) {
    case Activation::Relu:
      return "relu";
    case Activation::Sigmoid:
      return "sigmoid";
    case Activation::SinSq:
      return "sin2";
    case Activation::SinSqPlusX:
      return "sin2_plus_x";
  }
  return "?";
}

Activation parse_activation(std::string_view name) {
  if (name == "relu") return Activation::Relu;
  if (name == "sigmoid") return Activation::Sigmoid;
  if (name == "sin2" || name == "sinsq") return Activation::SinSq;
  if (name == "sin2_plus_x" || name == "sinsq_plus_x") return Activation::SinSqPlusX;
  throw std::invalid_argument("unknown activation '" + std::string(name) + "'");
}

ActivationJet activation_jet(Activation a, double z) {
  return dispatch(a, [&]<Activation K>() {
    const ActEval e = eval_activation<K>(z);
    return ActivationJet{e.v, e.d1, e.d2};
  });
}

double activation_third(Activation a, double z) {
  return dispatch(a, [&]<Activation K>() { return eval_activation<K>(z).d3; });
}

std::size_t parameter_count(std::span<const int> dims) {
  std::size_t n = 0;
  for (std::size_t p = 0; p + 1 < dims.size(); ++p)
    n += static_cast<std::size_t>(dims[p]) * static_cast<std::size_t>(dims[p + 1]) + static_cast<std::size_t>(dims[p + 1]);
  return n;
}

Mlp::Mlp(std::vector<int> dims, Activation activation, std::uint64_t seed, std::vector<double> params)
    : dims_(std::move(dims)), activation_(activation), seed_(seed), params_(std::move(params)) {
  if (dims_.size() < 2) throw std::invalid_argument("network needs at least an input and an output layer");
  for (int d : dims_)
    if (d <= 0) throw std::invalid_argument("layer widths must be positive");
  if (dims_.back() != 1) throw std::invalid_argument("output layer must have width 1");
  if (dims_.front() != 1 && dims_.front() != 2) throw std::invalid_argument("input layer must have width 1 or 2");
  if (params_.size() != graphpinn::parameter_count(dims_))
    throw std::invalid_argument("parameter vector length " + std::to_string(params_.size()) + " does not match " +
                                std::to_string(graphpinn::parameter_count(dims_)));
  std::size_t off = 0;
  for (std::size_t p = 0; p + 1 < dims_.size(); ++p) {
    offsets_.push_back(off);
    off += static_cast<std::size_t>(dims_[p]) * static_cast<std::size_t>(dims_[p + 1]) +
           static_cast<std::size_t>(dims_[p + 1]);
  }
}

std::size_t Mlp::bias_offset(int layer) const {
  const auto l = static_cast<std::size_t>(layer);
  return offsets_[l] + static_cast<std::size_t>(dims_[l]) * static_cast<std::size_t>(dims_[l + 1]);
}

Mlp Mlp::init(std::vector<int> dims, Activation activation, std::uint64_t seed) {
  if (dims.empty()) throw std::invalid_argument("empty layer dims");
  for (int d : dims)
    if (d <= 0) throw std::invalid_argument("layer widths must be positive");
  std::vector<double> params(graphpinn::parameter_count(dims), 0.0);
  std::mt19937_64 rng(seed);
  std::size_t off = 0;
  for (std::size_t p = 0; p + 1 < dims.size(); ++p) {
    const auto fan_in = static_cast<std::size_t>(dims[p]);
    const auto fan_out = static_cast<std::size_t>(dims[p + 1]);
    const double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    std::uniform_real_distribution<double> dist(-bound, bound);
    for (std::size_t k = 0; k < fan_in * fan_out; ++k) params[off + k] = dist(rng);
    off += fan_in * fan_out + fan_out;  // biases stay zero
  }
  return Mlp(std::move(dims), activation, seed, std::move(params));
}

double Mlp::forward(std::span<const double> input) const {
  if (input.size() != static_cast<std::size_t>(input_arity()))
    throw std::invalid_argument("input has " + std::to_string(input.size()) + " entries, network expects " +
                                std::to_string(input_arity()));
  InputBatch in;
  in.x = {input[0]};
  if (input.size() == 2) in.t = {input[1]};
  return forward_batch(*this, in)[0];
}

Jet Mlp::forward_jet(std::span<const double> input) const {
  if (input.size() != static_cast<std::size_t>(input_arity()))
    throw std::invalid_argument("input has " + std::to_string(input.size()) + " entries, network expects " +
                                std::to_string(input_arity()));
  InputBatch in;
  in.x = {input[0]};
  if (input.size() == 2) in.t = {input[1]};
  return forward_jet_batch(*this, in).at(0);
}

std::vector<double> forward_batch(const Mlp& m, const InputBatch& in) {
  JetCache::Impl ws;
  run_forward(m, in, 1, ws);
  const double* z = ws.out.row(0);
  return std::vector<double>(z, z + in.size());
}

JetBatch forward_jet_batch(const Mlp& m, const InputBatch& in, JetCache* cache) {
  const int channels = m.input_arity() == 1 ? 3 : 4;
  JetCache local;
  JetCache& c = cache ? *cache : local;
  if (!c.impl_) c.impl_ = std::make_unique<JetCache::Impl>();
  run_forward(m, in, channels, *c.impl_);
  const std::size_t batch = in.size();
  JetBatch out;
  const double* z = c.impl_->out.row(0);
  out.u.assign(z, z + batch);
  out.du_dx.assign(z + kDx * batch, z + (kDx + 1) * batch);
  out.d2u_dx2.assign(z + kDxx * batch, z + (kDxx + 1) * batch);
  if (channels == 4)
    out.du_dt.assign(z + kDt * batch, z + (kDt + 1) * batch);
  else
    out.du_dt.assign(batch, 0.0);
  return out;
}

void backward_jet_batch(const Mlp& m, const JetCache& cache, const JetBatch& adjoint, std::span<double> grad) {
  JetCache::Impl* c = cache.impl_.get();
  if (!c || c->owner != &m) throw std::invalid_argument("jet cache was recorded for a different network");
  if (grad.size() != m.parameter_count()) throw std::invalid_argument("gradient length does not match network");
  const std::size_t batch = c->batch;
  const int channels = c->channels;
  if (adjoint.size() != batch) throw std::invalid_argument("adjoint batch size does not match cached batch");

  Mat* Zb = &c->grad_a;
  Mat* Ab = &c->grad_b;
  Zb->resize(1, batch * static_cast<std::size_t>(channels));
  double* zb = Zb->row(0);
  std::copy(adjoint.u.begin(), adjoint.u.end(), zb);
  std::copy(adjoint.du_dx.begin(), adjoint.du_dx.end(), zb + kDx * batch);
  std::copy(adjoint.d2u_dx2.begin(), adjoint.d2u_dx2.end(), zb + kDxx * batch);
  if (channels == 4) std::copy(adjoint.du_dt.begin(), adjoint.du_dt.end(), zb + kDt * batch);

  const auto& dims = m.dims();
  const double* p = m.parameters().data();
  for (int l = m.num_layers() - 1; l >= 0; --l) {
    const auto h = static_cast<std::size_t>(l);
    affine_backward(p + m.weight_offset(l), dims[h + 1], dims[h], c->inputs[h], *Zb, batch,
                    grad.data() + m.weight_offset(l), grad.data() + m.bias_offset(l), l > 0 ? Ab : nullptr);
    if (l == 0) break;
    activation_backward(c->pre[h - 1], *Ab, c->s1[h - 1], c->s2[h - 1], c->s3[h - 1], batch, channels, *Zb);
  }
}

struct JetRecorder::Record {
  const Mlp* net = nullptr;
  JetCache cache;
  std::uint32_t first_leaf = 0;
  std::size_t batch = 0;
  int leaves_per_sample = 0;
};

JetRecorder::JetRecorder() = default;
JetRecorder::~JetRecorder() = default;

std::vector<BasicJet<Var>> JetRecorder::evaluate(const Mlp& net, const InputBatch& in) {
  if (used_ == records_.size()) records_.push_back(std::make_unique<Record>());
  Record& rec = *records_[used_];
  rec.net = &net;
  rec.batch = in.size();
  JetBatch jb = forward_jet_batch(net, in, &rec.cache);
  ++used_;
  const bool timed = net.input_arity() == 2;
  rec.leaves_per_sample = timed ? 4 : 3;
  rec.first_leaf = static_cast<std::uint32_t>(tape_.size());
  std::vector<BasicJet<Var>> out(rec.batch);
  for (std::size_t s = 0; s < rec.batch; ++s) {
    out[s].u = tape_.variable(jb.u[s]);
    out[s].du_dx = tape_.variable(jb.du_dx[s]);
    out[s].d2u_dx2 = tape_.variable(jb.d2u_dx2[s]);
    out[s].du_dt = timed ? tape_.variable(jb.du_dt[s]) : Var(0.0);
  }
  return out;
}

std::vector<const Mlp*> JetRecorder::networks() const {
  std::vector<const Mlp*> nets;
  for (std::size_t k = 0; k < used_; ++k) {
    const Mlp* n = records_[k]->net;
    if (std::find(nets.begin(), nets.end(), n) == nets.end()) nets.push_back(n);
  }
  return nets;
}

std::vector<WeightGradient> JetRecorder::gradients(const Var& loss, std::span<const Mlp* const> nets) const {
  std::vector<WeightGradient> out;
  out.reserve(nets.size());
  for (const Mlp* n : nets) out.emplace_back(n->parameter_count(), 0.0);
  if (loss.is_constant()) return out;
  const std::vector<double> adj = tape_.adjoints(loss);
  JetBatch a;
  for (std::size_t k = 0; k < used_; ++k) {
    const Record& r = *records_[k];
    auto it = std::find(nets.begin(), nets.end(), r.net);
    if (it == nets.end()) continue;
    a.u.resize(r.batch);
    a.du_dx.resize(r.batch);
    a.d2u_dx2.resize(r.batch);
    a.du_dt.assign(r.batch, 0.0);
    const auto stride = static_cast<std::size_t>(r.leaves_per_sample);
    for (std::size_t s = 0; s < r.batch; ++s) {
      const std::size_t base = r.first_leaf + s * stride;
      a.u[s] = adj[base];
      a.du_dx[s] = adj[base + 1];
      a.d2u_dx2[s] = adj[base + 2];
      if (stride == 4) a.du_dt[s] = adj[base + 3];
    }
    backward_jet_batch(*r.net, r.cache, a, out[static_cast<std::size_t>(it - nets.begin())]);
  }
  return out;
}

void JetRecorder::clear() {
  tape_.clear();
  used_ = 0;
}

WeightGradient loss_gradient(const Mlp& m, const LossProgram& program) {
  JetRecorder rec;
  const Var loss = program(rec);
  for (const Mlp* n : rec.networks())
    if (n != &m) throw std::invalid_argument("loss program references a different network's parameters");
  const Mlp* nets[] = {&m};
  return rec.gradients(loss, nets).front();
}

void write_mlp(std::ostream& out, const Mlp& m) {
  out << "mlp\n";
  out << "dims";
  for (int d : m.dims()) out << ' ' << d;
  out << "\nactivation " << to_string(m.activation()) << "\n";
  out << "seed " << m.seed() << "\n";
  out << "params " << m.parameter_count() << "\n";
  char buf[64];
  for (double w : m.parameters()) {
    std::snprintf(buf, sizeof buf, "%a\n", w);
    out << buf;
  }
  out << "end\n";
}

namespace {

std::string next_line(std::istream& in, const char* expect) {
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) return line;
  }
  throw ParseError(std::string("unexpected end of network block, expected '") + expect + "'");
}

std::string expect_key(std::istream& in, const char* key) {
  std::string line = next_line(in, key);
  std::istringstream ls(line);
  std::string k;
  ls >> k;
  if (k != key) throw ParseError(std::string("expected '") + key + "', got '" + line + "'");
  std::string rest;
  std::getline(ls, rest);
  auto b = rest.find_first_not_of(' ');
  return b == std::string::npos ? std::string() : rest.substr(b);
}

}  // namespace

Mlp read_mlp(std::istream& in) {
  expect_key(in, "mlp");
  std::vector<int> dims;
  {
    std::istringstream ds(expect_key(in, "dims"));
    for (int d; ds >> d;) dims.push_back(d);
  }
  Activation act = parse_activation(expect_key(in, "activation"));
  std::uint64_t seed = std::stoull(expect_key(in, "seed"));
  std::size_t count = std::stoull(expect_key(in, "params"));
  std::vector<double> params(count);
  for (std::size_t k = 0; k < count; ++k) {
    std::string line = next_line(in, "parameter");
    char* end = nullptr;
    params[k] = std::strtod(line.c_str(), &end);
    if (end == line.c_str() || *end != '\0') throw ParseError("bad parameter value '" + line + "'");
  }
  expect_key(in, "end");
  return Mlp(std::move(dims), act, seed, std::move(params));
}

}  // namespace graphpinn
