#include "emob/policy.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace emob {

using Eigen::Map;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

VectorXd sigmoid(const VectorXd& z) { return (1.0 + (-z.array()).exp()).inverse().matrix(); }

}  // namespace

PolicyNet::PolicyNet(PolicyShape shape) : shape_(shape) {
  const std::size_t H = shape.hidden, D = shape.obs_dim, Hh = shape.head_hidden;
  std::size_t off = 0;
  wx_ = off;
  off += 4 * H * D;
  wh_ = off;
  off += 4 * H * H;
  b_ = off;
  off += 4 * H;
  const int outs[3] = {shape.levels, shape.levels, 1};
  for (int k = 0; k < 3; ++k) {
    HeadOffsets& h = heads_[k];
    h.out = outs[k];
    h.w1 = off;
    off += Hh * H;
    h.b1 = off;
    off += Hh;
    h.w2 = off;
    off += h.out * Hh;
    h.b2 = off;
    off += h.out;
  }
  total_ = off;
}

std::vector<double> PolicyNet::init(std::uint64_t seed) const {
  Rng rng(derive_seed(seed, 0x706f6c));
  std::vector<double> theta(total_, 0.0);
  const int H = shape_.hidden, D = shape_.obs_dim, Hh = shape_.head_hidden;
  auto fill = [&](std::size_t off, std::size_t count, double a) {
    for (std::size_t i = 0; i < count; ++i) theta[off + i] = uniform(rng, -a, a);
  };
  fill(wx_, 4 * H * D, std::sqrt(6.0 / (D + H)));
  fill(wh_, 4 * H * H, std::sqrt(6.0 / (2.0 * H)));
  for (int j = 0; j < H; ++j) theta[b_ + H + j] = 1.0;  // forget gate
  for (const auto& h : heads_) {
    fill(h.w1, static_cast<std::size_t>(Hh) * H, std::sqrt(6.0 / (H + Hh)));
    fill(h.w2, static_cast<std::size_t>(h.out) * Hh, 0.01 * std::sqrt(6.0 / (Hh + h.out)));
  }
  return theta;
}

LstmState PolicyNet::initial_state() const {
  return {VectorXd::Zero(shape_.hidden), VectorXd::Zero(shape_.hidden)};
}

PolicyOutput PolicyNet::step(const std::vector<double>& theta, const VectorXd& x, LstmState& st,
                             StepCache* cache) const {
  const int H = shape_.hidden, D = shape_.obs_dim, Hh = shape_.head_hidden;
  if (x.size() != D) throw std::invalid_argument("observation size does not match the policy");
  Map<const MatrixXd> Wx(theta.data() + wx_, 4 * H, D);
  Map<const MatrixXd> Wh(theta.data() + wh_, 4 * H, H);
  Map<const VectorXd> b(theta.data() + b_, 4 * H);

  const VectorXd z = Wx * x + Wh * st.h + b;
  const VectorXd i = sigmoid(z.segment(0, H));
  const VectorXd f = sigmoid(z.segment(H, H));
  const VectorXd g = z.segment(2 * H, H).array().tanh().matrix();
  const VectorXd o = sigmoid(z.segment(3 * H, H));
  VectorXd c = f.cwiseProduct(st.c) + i.cwiseProduct(g);
  VectorXd tanh_c = c.array().tanh().matrix();
  VectorXd h = o.cwiseProduct(tanh_c);

  PolicyOutput out;
  VectorXd acts[3];
  for (int k = 0; k < 3; ++k) {
    const HeadOffsets& ho = heads_[k];
    Map<const MatrixXd> W1(theta.data() + ho.w1, Hh, H);
    Map<const VectorXd> b1(theta.data() + ho.b1, Hh);
    Map<const MatrixXd> W2(theta.data() + ho.w2, ho.out, Hh);
    Map<const VectorXd> b2(theta.data() + ho.b2, ho.out);
    acts[k] = (W1 * h + b1).array().tanh().matrix();
    const VectorXd y = W2 * acts[k] + b2;
    if (k == 0) out.add_logits = y;
    if (k == 1) out.remove_logits = y;
    if (k == 2) out.value = y(0);
  }

  if (cache) {
    cache->x = x;
    cache->h_prev = st.h;
    cache->c_prev = st.c;
    cache->i = i;
    cache->f = f;
    cache->g = g;
    cache->o = o;
    cache->c = c;
    cache->tanh_c = tanh_c;
    cache->h = h;
    for (int k = 0; k < 3; ++k) cache->head_act[k] = acts[k];
  }
  st.h = std::move(h);
  st.c = std::move(c);
  return out;
}

void PolicyNet::backward(const std::vector<double>& theta, const std::vector<StepCache>& caches,
                         const std::vector<VectorXd>& d_add, const std::vector<VectorXd>& d_remove,
                         const std::vector<double>& d_value, std::vector<double>& grad) const {
  const int H = shape_.hidden, D = shape_.obs_dim, Hh = shape_.head_hidden;
  if (grad.size() != total_) grad.assign(total_, 0.0);
  Map<const MatrixXd> Wh(theta.data() + wh_, 4 * H, H);
  Map<MatrixXd> gWx(grad.data() + wx_, 4 * H, D);
  Map<MatrixXd> gWh(grad.data() + wh_, 4 * H, H);
  Map<VectorXd> gb(grad.data() + b_, 4 * H);

  VectorXd dh_next = VectorXd::Zero(H), dc_next = VectorXd::Zero(H);
  VectorXd dz(4 * H);
  for (int t = static_cast<int>(caches.size()) - 1; t >= 0; --t) {
    const StepCache& s = caches[t];
    VectorXd dh = dh_next;
    for (int k = 0; k < 3; ++k) {
      const HeadOffsets& ho = heads_[k];
      VectorXd dout(ho.out);
      if (k == 0) dout = d_add[t];
      if (k == 1) dout = d_remove[t];
      if (k == 2) dout(0) = d_value[t];
      if (dout.isZero(0.0)) continue;
      Map<const MatrixXd> W1(theta.data() + ho.w1, Hh, H);
      Map<const MatrixXd> W2(theta.data() + ho.w2, ho.out, Hh);
      Map<MatrixXd> gW1(grad.data() + ho.w1, Hh, H);
      Map<VectorXd> gb1(grad.data() + ho.b1, Hh);
      Map<MatrixXd> gW2(grad.data() + ho.w2, ho.out, Hh);
      Map<VectorXd> gb2(grad.data() + ho.b2, ho.out);
      const VectorXd& a = s.head_act[k];
      gW2.noalias() += dout * a.transpose();
      gb2 += dout;
      const VectorXd dpre = (W2.transpose() * dout).cwiseProduct((1.0 - a.array().square()).matrix());
      gW1.noalias() += dpre * s.h.transpose();
      gb1 += dpre;
      dh.noalias() += W1.transpose() * dpre;
    }
    const VectorXd dc = dc_next + dh.cwiseProduct(s.o).cwiseProduct((1.0 - s.tanh_c.array().square()).matrix());
    const VectorXd d_o = dh.cwiseProduct(s.tanh_c);
    const VectorXd d_i = dc.cwiseProduct(s.g);
    const VectorXd d_g = dc.cwiseProduct(s.i);
    const VectorXd d_f = dc.cwiseProduct(s.c_prev);
    dz.segment(0, H) = d_i.cwiseProduct((s.i.array() * (1.0 - s.i.array())).matrix());
    dz.segment(H, H) = d_f.cwiseProduct((s.f.array() * (1.0 - s.f.array())).matrix());
    dz.segment(2 * H, H) = d_g.cwiseProduct((1.0 - s.g.array().square()).matrix());
    dz.segment(3 * H, H) = d_o.cwiseProduct((s.o.array() * (1.0 - s.o.array())).matrix());
    gWx.noalias() += dz * s.x.transpose();
    gWh.noalias() += dz * s.h_prev.transpose();
    gb += dz;
    dh_next.noalias() = Wh.transpose() * dz;
    dc_next = dc.cwiseProduct(s.f);
  }
}

VectorXd softmax(const VectorXd& logits) {
  const double m = logits.maxCoeff();
  VectorXd e = (logits.array() - m).exp().matrix();
  return e / e.sum();
}

VectorXd log_softmax(const VectorXd& logits) {
  const double m = logits.maxCoeff();
  const double lse = m + std::log((logits.array() - m).exp().sum());
  return (logits.array() - lse).matrix();
}

double entropy(const VectorXd& p) {
  double h = 0;
  for (int k = 0; k < p.size(); ++k)
    if (p(k) > 0) h -= p(k) * std::log(p(k));
  return h;
}

int sample_categorical(const VectorXd& probs, Rng& rng) {
  const double u = uniform01(rng);
  double acc = 0;
  for (int k = 0; k < probs.size(); ++k) {
    acc += probs(k);
    if (u < acc) return k;
  }
  return static_cast<int>(probs.size()) - 1;
}

int argmax_level(const VectorXd& probs) {
  int best = 0;
  for (int k = 1; k < probs.size(); ++k)
    if (probs(k) > probs(best)) best = k;
  return best;
}

namespace {

[[noreturn]] void fail_non_finite(const std::vector<double>& theta, const PolicyOutput& out) {
  std::ostringstream name;
  name << "emob_nan_params_" << std::hex << fnv1a({reinterpret_cast<const char*>(theta.data()),
                                                   theta.size() * sizeof(double)})
       << ".json";
  const auto path = std::filesystem::temp_directory_path() / name.str();
  std::ofstream(path) << nlohmann::json(theta).dump();
  std::ostringstream msg;
  msg << "non-finite policy logits (add " << out.add_logits.transpose() << "; remove " << out.remove_logits.transpose()
      << "); parameters dumped to " << path.string();
  throw NonFiniteError(msg.str());
}

}  // namespace

HighLevelDecision high_level_step(const PolicyNet& net, const std::vector<double>& theta, const VectorXd& obs,
                                  LstmState& state, Rng& rng, bool sample, StepCache* cache) {
  const PolicyOutput out = net.step(theta, obs, state, cache);
  if (!out.add_logits.allFinite() || !out.remove_logits.allFinite() || !std::isfinite(out.value))
    fail_non_finite(theta, out);
  HighLevelDecision d;
  d.value = out.value;
  d.add_probs = softmax(out.add_logits);
  d.remove_probs = softmax(out.remove_logits);
  if (sample) {
    d.add_level = sample_categorical(d.add_probs, rng);
    d.remove_level = sample_categorical(d.remove_probs, rng);
  } else {
    d.add_level = argmax_level(d.add_probs);
    d.remove_level = argmax_level(d.remove_probs);
  }
  d.log_prob = log_softmax(out.add_logits)(d.add_level) + log_softmax(out.remove_logits)(d.remove_level);
  return d;
}

}  // namespace emob
