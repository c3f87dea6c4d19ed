#include <cmath>
#include <mutex>
#include <unordered_map>

#include "hjhom/errors.hpp"
#include "hjhom/hamlib.hpp"

namespace hjhom {

double strictify_eta(int n, double alpha0, double alpha1, double gamma) {
  double R = hat_radius(alpha0, alpha1, gamma);
  double t = 1.0 + R + std::pow(static_cast<double>(n), 1.0 / gamma);
  return 1.0 / (static_cast<double>(n) * t * t * t * t);
}

namespace {

class StrictifiedModel final : public HamiltonianModel {
 public:
  StrictifiedModel(HamiltonianField base, int n, const StrictifyOptions& opts)
      : base_(std::move(base)), n_(n) {
    floor_ = 2.0 / n;
    eta_ = strictify_eta(n, base_.alpha0, base_.alpha1, base_.gamma);
    radius_ = 1.0 / (2.0 * n * opts.mollifier_constant);
    spacing_ = opts.table_spacing > 0 ? opts.table_spacing : radius_ / 8.0;
    chunk_ = opts.chunk_length;
    nodes_ = static_cast<long>(std::ceil(chunk_ / spacing_));
    spacing_ = chunk_ / static_cast<double>(nodes_);
    half_ = static_cast<long>(std::ceil(radius_ / spacing_));
    double total = 0.0;
    for (long i = -half_; i <= half_; ++i) {
      double s = static_cast<double>(i) * spacing_ / radius_;
      double w = std::abs(s) < 1.0 ? (15.0 / 16.0) * (1 - s * s) * (1 - s * s) : 0.0;
      weights_.push_back(w);
      total += w;
    }
    if (total <= 0.0) {
      weights_.assign(weights_.size(), 0.0);
      weights_[half_] = 1.0;
    } else {
      for (double& w : weights_) w /= total;
    }
  }

  double value(double x, double p) const override {
    auto [V, P] = lookup(x);
    double q = std::abs(p - P);
    double G = base_(x, p) - V;
    return std::max(floor_, G) + eta_ * (q * q * q * q + q) + V;
  }

  double dp(double x, double p) const override {
    auto [V, P] = lookup(x);
    double d = p - P;
    double q = std::abs(d);
    double G = base_(x, p) - V;
    double g = G > floor_ ? base_.dp(x, p) : 0.0;
    double s = d > 0 ? 1.0 : (d < 0 ? -1.0 : 0.0);
    return g + eta_ * s * (4.0 * q * q * q + 1.0);
  }

  double selection(double x) const { return lookup(x).second; }
  double eta() const { return eta_; }

 private:
  struct Chunk {
    std::vector<double> V, P;
  };

  std::pair<double, double> lookup(double x) const {
    auto k = static_cast<long>(std::floor(x / chunk_));
    const Chunk& c = chunk(k);
    double t = (x - static_cast<double>(k) * chunk_) / spacing_;
    auto i = static_cast<long>(std::floor(t));
    i = std::clamp(i, 0L, nodes_ - 1);
    double w = t - static_cast<double>(i);
    return {c.V[i] + w * (c.V[i + 1] - c.V[i]), c.P[i] + w * (c.P[i + 1] - c.P[i])};
  }

  const Chunk& chunk(long k) const {
    std::lock_guard<std::mutex> lock(mu_);
    auto it = cache_.find(k);
    if (it != cache_.end()) return *it->second;
    auto c = std::make_unique<Chunk>();
    long total = nodes_ + 1 + 2 * half_;
    std::vector<double> raw(total), V(total);
    double x0 = static_cast<double>(k) * chunk_;
    for (long j = 0; j < total; ++j) {
      double x = x0 + static_cast<double>(j - half_) * spacing_;
      MinPoint m = min_profile(base_, x);
      SublevelEndpoints e = sublevel_endpoints(base_, x, m.lambda_hat + 1.0 / n_, m);
      raw[j] = 0.5 * (e.p_minus + e.p_plus);
      V[j] = m.lambda_hat;
    }
    c->V.resize(nodes_ + 1);
    c->P.resize(nodes_ + 1);
    for (long j = 0; j <= nodes_; ++j) {
      double s = 0.0;
      for (long i = -half_; i <= half_; ++i) s += weights_[i + half_] * raw[j + half_ + i];
      c->P[j] = s;
      c->V[j] = V[j + half_];
    }
    const Chunk& ref = *c;
    cache_.emplace(k, std::move(c));
    return ref;
  }

  HamiltonianField base_;
  int n_;
  double floor_, eta_, radius_, spacing_, chunk_;
  long nodes_, half_;
  std::vector<double> weights_;
  mutable std::mutex mu_;
  mutable std::unordered_map<long, std::unique_ptr<Chunk>> cache_;
};

}  // namespace

HamiltonianField strictify(const HamiltonianField& H, int n, const StrictifyOptions& opts) {
  if (n < 1) throw ConfigError("strictify.n", "must be at least 1");
  if (!(opts.mollifier_constant > 0)) throw ConfigError("strictify.C", "must be positive");
  HamiltonianField out;
  out.model = std::make_shared<StrictifiedModel>(H, n, opts);
  out.form = HamiltonianForm::strictified;
  out.offset = 0.0;
  out.gamma = std::max(H.gamma, 4.0);
  out.eta = strictify_eta(n, H.alpha0, H.alpha1, H.gamma);
  double R = hat_radius(H.alpha0, H.alpha1, H.gamma);
  out.alpha0 = H.gamma < 4.0 ? std::min(H.alpha0, out.eta / 16.0) : H.alpha0;
  out.alpha1 = 2.0 * H.alpha1 + 2.0 / n + out.eta * (10.0 + 8.0 * R * R * R * R + R);
  return out;
}

double strictify_selection(const HamiltonianField& Hn, double x) {
  auto m = std::dynamic_pointer_cast<const StrictifiedModel>(Hn.model);
  if (!m) throw ConfigError("strictify_selection", "field is not strictified");
  return m->selection(x + Hn.offset);
}

double strictify_distance_bound(const HamiltonianField& H, int n, double R) {
  double eta = strictify_eta(n, H.alpha0, H.alpha1, H.gamma);
  double D = R + hat_radius(H.alpha0, H.alpha1, H.gamma);
  return 2.0 / n + eta * (D * D * D * D + D);
}

}  // namespace hjhom
