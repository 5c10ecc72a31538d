#include "xcf/grid.hpp"

#include <atomic>
#include <cstring>
#include <fstream>
#include <random>
#include <thread>

namespace xcf {

namespace {
std::atomic<int> g_threads{0};
}

void set_threads(int n) { g_threads.store(n > 0 ? n : 0); }

int threads() {
  int n = g_threads.load();
  if (n > 0) return n;
  n = static_cast<int>(std::thread::hardware_concurrency());
  return n > 0 ? n : 1;
}

void parallel_for(std::int64_t n,
                  const std::function<void(std::int64_t, std::int64_t)>& chunk_fn) {
  const int nt = std::min<std::int64_t>(threads(), n);
  if (nt <= 1 || n < 4096) {
    chunk_fn(0, n);
    return;
  }
  std::vector<std::thread> pool;
  const std::int64_t chunk = (n + nt - 1) / nt;
  for (int t = 0; t < nt; ++t) {
    const std::int64_t lo = t * chunk;
    const std::int64_t hi = std::min(n, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([&, lo, hi] { chunk_fn(lo, hi); });
  }
  for (auto& th : pool) th.join();
}

GridSpec::GridSpec(int n_, int order_) : n(n_), stencil_order(order_) {
  if (order_ != 2 && order_ != 4 && order_ != 6)
    throw InvalidParameter("GridSpec: stencil order must be 2, 4 or 6");
  if (n < 2 * stencil_order + 1)
    throw InvalidParameter("GridSpec: N must be at least 2*order+1");
}

Vec3 GridSpec::coords(std::int64_t node) const {
  const int iz = static_cast<int>(node % n);
  const int iy = static_cast<int>((node / n) % n);
  const int ix = static_cast<int>(node / (static_cast<std::int64_t>(n) * n));
  return Vec3(ix * dx(), iy * dx(), iz * dx());
}

TensorGrid::TensorGrid(const GridSpec& s, std::vector<Variance> variances)
    : spec(s), rank(static_cast<int>(variances.size())), var(std::move(variances)) {
  std::int64_t comps = 1;
  for (int i = 0; i < rank; ++i) comps *= 3;
  v.assign(s.nodes() * comps, 0.0);
}

namespace {

struct Stencil {
  int half;
  double c1[7];  // first derivative, offsets -half..half
  double c2[7];  // second derivative
};

const Stencil& stencil_for(int order) {
  static const Stencil s2{1, {-0.5, 0.0, 0.5}, {1.0, -2.0, 1.0}};
  static const Stencil s4{2,
                          {1.0 / 12, -2.0 / 3, 0.0, 2.0 / 3, -1.0 / 12},
                          {-1.0 / 12, 4.0 / 3, -5.0 / 2, 4.0 / 3, -1.0 / 12}};
  static const Stencil s6{3,
                          {-1.0 / 60, 3.0 / 20, -3.0 / 4, 0.0, 3.0 / 4,
                           -3.0 / 20, 1.0 / 60},
                          {1.0 / 90, -3.0 / 20, 3.0 / 2, -49.0 / 18, 3.0 / 2,
                           -3.0 / 20, 1.0 / 90}};
  switch (order) {
    case 2: return s2;
    case 4: return s4;
    default: return s6;
  }
}

// Applies a 1-d periodic stencil along `axis` to every (node, comp) entry.
void apply_stencil(const GridSpec& spec, const double* in, double* out,
                   int ncomp, int axis, const double* coeff, int half,
                   double scale) {
  const int n = spec.n;
  const std::int64_t stride_comp = ncomp;
  parallel_for(spec.nodes(), [&](std::int64_t lo, std::int64_t hi) {
    for (std::int64_t node = lo; node < hi; ++node) {
      const int iz = static_cast<int>(node % n);
      const int iy = static_cast<int>((node / n) % n);
      const int ix = static_cast<int>(node / (static_cast<std::int64_t>(n) * n));
      int idx[3] = {ix, iy, iz};
      for (int c = 0; c < ncomp; ++c) {
        double sum = 0.0;
        for (int s = -half; s <= half; ++s) {
          if (coeff[s + half] == 0.0) continue;
          int jdx[3] = {idx[0], idx[1], idx[2]};
          jdx[axis] = (idx[axis] + s % n + n) % n;
          const std::int64_t nb = spec.node(jdx[0], jdx[1], jdx[2]);
          sum += coeff[s + half] * in[nb * stride_comp + c];
        }
        out[node * stride_comp + c] = sum * scale;
      }
    }
  });
}

}  // namespace

ScalarGrid deriv1(const ScalarGrid& f, int axis) {
  const Stencil& st = stencil_for(f.spec.stencil_order);
  ScalarGrid out(f.spec);
  apply_stencil(f.spec, f.v.data(), out.v.data(), 1, axis, st.c1, st.half,
                1.0 / f.spec.dx());
  return out;
}

ScalarGrid deriv2(const ScalarGrid& f, int axis) {
  const Stencil& st = stencil_for(f.spec.stencil_order);
  ScalarGrid out(f.spec);
  apply_stencil(f.spec, f.v.data(), out.v.data(), 1, axis, st.c2, st.half,
                1.0 / (f.spec.dx() * f.spec.dx()));
  return out;
}

TensorGrid deriv1(const TensorGrid& f, int axis) {
  const Stencil& st = stencil_for(f.spec.stencil_order);
  TensorGrid out(f.spec, f.var);
  apply_stencil(f.spec, f.v.data(), out.v.data(), f.ncomp(), axis, st.c1,
                st.half, 1.0 / f.spec.dx());
  return out;
}

namespace {

// Metric as a 6-component field in (i<=j) order for differentiation.
TensorGrid metric_as_field(const MetricGrid& m) {
  TensorGrid f(m.spec, {Variance::Covariant, Variance::Covariant});
  parallel_for(m.spec.nodes(), [&](std::int64_t lo, std::int64_t hi) {
    for (std::int64_t node = lo; node < hi; ++node)
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) f.at(node, i * 3 + j) = m.g[node](i, j);
  });
  return f;
}

}  // namespace

std::vector<MetricJet2> jet_at_nodes(const MetricGrid& m) {
  const TensorGrid f = metric_as_field(m);
  std::array<TensorGrid, 3> d;
  for (int a = 0; a < 3; ++a) d[a] = deriv1(f, a);
  // ddg: diagonal by the second-derivative stencil, mixed by nested d1.
  std::array<std::array<TensorGrid, 3>, 3> dd;
  const Stencil& st = stencil_for(m.spec.stencil_order);
  for (int a = 0; a < 3; ++a) {
    dd[a][a] = TensorGrid(m.spec, f.var);
    apply_stencil(m.spec, f.v.data(), dd[a][a].v.data(), 9, a, st.c2, st.half,
                  1.0 / (m.spec.dx() * m.spec.dx()));
    for (int b = a + 1; b < 3; ++b) {
      dd[a][b] = deriv1(d[b], a);
    }
  }
  std::vector<MetricJet2> jets(m.spec.nodes());
  parallel_for(m.spec.nodes(), [&](std::int64_t lo, std::int64_t hi) {
    for (std::int64_t node = lo; node < hi; ++node) {
      MetricJet2& J = jets[node];
      J.g = m.g[node];
      for (int a = 0; a < 3; ++a)
        for (int i = 0; i < 3; ++i)
          for (int j = 0; j < 3; ++j) J.dg[a](i, j) = d[a].get(node, i * 3 + j);
      for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b) {
          const TensorGrid& src = (a <= b) ? dd[a][b] : dd[b][a];
          for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
              J.ddg[a][b](i, j) = src.get(node, i * 3 + j);
        }
    }
  });
  return jets;
}

TensorGrid gamma_grid(const MetricGrid& m, const std::vector<MetricJet2>& jets) {
  TensorGrid G(m.spec,
               {Variance::Contravariant, Variance::Covariant, Variance::Covariant});
  parallel_for(m.spec.nodes(), [&](std::int64_t lo, std::int64_t hi) {
    for (std::int64_t node = lo; node < hi; ++node) {
      const Gamma gm = christoffels_from_jet(jets[node]);
      for (int k = 0; k < 3; ++k)
        for (int i = 0; i < 3; ++i)
          for (int j = 0; j < 3; ++j)
            G.at(node, (k * 3 + i) * 3 + j) = gm(k, i, j);
    }
  });
  return G;
}

std::vector<GammaJet> gamma_jet_at_nodes(const MetricGrid& m,
                                         const TensorGrid& gammas) {
  std::array<TensorGrid, 3> dG;
  for (int a = 0; a < 3; ++a) dG[a] = deriv1(gammas, a);
  std::vector<GammaJet> out(m.spec.nodes());
  parallel_for(m.spec.nodes(), [&](std::int64_t lo, std::int64_t hi) {
    for (std::int64_t node = lo; node < hi; ++node)
      for (int l = 0; l < 3; ++l)
        for (int k = 0; k < 3; ++k)
          for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
              out[node].at(l, k, i, j) = dG[l].get(node, (k * 3 + i) * 3 + j);
  });
  return out;
}

std::vector<CurvatureBundle> bundles_at_nodes(const MetricGrid& m) {
  const auto jets = jet_at_nodes(m);
  const TensorGrid G = gamma_grid(m, jets);
  const auto dG = gamma_jet_at_nodes(m, G);
  std::vector<CurvatureBundle> out(m.spec.nodes());
  parallel_for(m.spec.nodes(), [&](std::int64_t lo, std::int64_t hi) {
    for (std::int64_t node = lo; node < hi; ++node)
      out[node] = curvature_from_jet(jets[node], dG[node]);
  });
  return out;
}

TensorGrid covariant_derivative(const TensorGrid& T, const TensorGrid& gammas) {
  if (!(T.spec == gammas.spec))
    throw Error("covariant_derivative: grid shape mismatch");
  const int rank = T.rank;
  std::vector<Variance> ovar(1, Variance::Covariant);
  ovar.insert(ovar.end(), T.var.begin(), T.var.end());
  TensorGrid out(T.spec, ovar);

  std::array<TensorGrid, 3> dT;
  for (int a = 0; a < 3; ++a) dT[a] = deriv1(T, a);

  const int ncomp = T.ncomp();
  std::vector<int> pow3(rank + 1, 1);
  for (int i = 1; i <= rank; ++i) pow3[i] = pow3[i - 1] * 3;

  parallel_for(T.spec.nodes(), [&](std::int64_t lo, std::int64_t hi) {
    std::vector<int> idx(rank);
    for (std::int64_t node = lo; node < hi; ++node) {
      for (int k = 0; k < 3; ++k)
        for (int c = 0; c < ncomp; ++c) {
          int rem = c;
          for (int s = rank - 1; s >= 0; --s) {
            idx[s] = rem % 3;
            rem /= 3;
          }
          double sum = dT[k].get(node, c);
          for (int s = 0; s < rank; ++s) {
            const int a = idx[s];
            const int stride = pow3[rank - 1 - s];
            const int base = c - a * stride;
            for (int mth = 0; mth < 3; ++mth) {
              const double tv = T.get(node, base + mth * stride);
              if (T.var[s] == Variance::Covariant)
                sum -= gammas.get(node, (mth * 3 + k) * 3 + a) * tv;
              else
                sum += gammas.get(node, (a * 3 + k) * 3 + mth) * tv;
            }
          }
          out.at(node, k * ncomp + c) = sum;
        }
    }
  });
  return out;
}

TensorGrid covariant_divergence(const TensorGrid& T, const TensorGrid& gammas,
                                int slot) {
  const int rank = T.rank;
  if (slot < 0 || slot >= rank || T.var[slot] != Variance::Contravariant)
    throw Error("covariant_divergence: slot must be contravariant");
  std::vector<Variance> ovar;
  for (int s = 0; s < rank; ++s)
    if (s != slot) ovar.push_back(T.var[s]);
  TensorGrid out(T.spec, ovar);

  const Stencil& st = stencil_for(T.spec.stencil_order);
  const double inv_dx = 1.0 / T.spec.dx();
  const int n = T.spec.n;
  const int ncomp = T.ncomp();
  const int oncomp = out.ncomp();
  std::vector<int> pow3(rank, 1);
  for (int i = 1; i < rank; ++i) pow3[i] = pow3[i - 1] * 3;
  // pow3[i] = 3^i; stride of slot s is 3^(rank-1-s).

  parallel_for(T.spec.nodes(), [&](std::int64_t lo, std::int64_t hi) {
    std::vector<int> idx(rank);
    for (std::int64_t node = lo; node < hi; ++node) {
      const int iz = static_cast<int>(node % n);
      const int iy = static_cast<int>((node / n) % n);
      const int ix = static_cast<int>(node / (static_cast<std::int64_t>(n) * n));
      const int nidx[3] = {ix, iy, iz};
      for (int cp = 0; cp < oncomp; ++cp) {
        // Expand reduced component into full indices with a hole at `slot`.
        int rem = cp;
        for (int s = rank - 1; s >= 0; --s) {
          if (s == slot) continue;
          idx[s] = rem % 3;
          rem /= 3;
        }
        double sum = 0.0;
        for (int m = 0; m < 3; ++m) {
          idx[slot] = m;
          int c = 0;
          for (int s = 0; s < rank; ++s) c = c * 3 + idx[s];
          // partial derivative along axis m
          double dpart = 0.0;
          for (int o = -st.half; o <= st.half; ++o) {
            if (st.c1[o + st.half] == 0.0) continue;
            int jdx[3] = {nidx[0], nidx[1], nidx[2]};
            jdx[m] = (jdx[m] + o + n) % n;
            dpart += st.c1[o + st.half] *
                     T.v[T.spec.node(jdx[0], jdx[1], jdx[2]) * ncomp + c];
          }
          sum += dpart * inv_dx;
          // connection corrections
          for (int s = 0; s < rank; ++s) {
            const int a = s == slot ? m : idx[s];
            const int stride = pow3[rank - 1 - s];
            const int base = c - a * stride;
            for (int b = 0; b < 3; ++b) {
              const double tv = T.v[node * ncomp + base + b * stride];
              if (T.var[s] == Variance::Contravariant)
                sum += gammas.get(node, (a * 3 + m) * 3 + b) * tv;
              else
                sum -= gammas.get(node, (b * 3 + m) * 3 + a) * tv;
            }
          }
        }
        out.at(node, cp) = sum;
      }
    }
  });
  return out;
}

double integrate(const ScalarGrid& f, const MetricGrid& m) {
  if (!(f.spec == m.spec)) throw Error("integrate: grid shape mismatch");
  const double w = std::pow(m.spec.dx(), 3);
  // Compensated summation in a fixed order.
  double sum = 0.0, comp = 0.0;
  for (std::int64_t node = 0; node < m.spec.nodes(); ++node) {
    const double term = f.v[node] * std::sqrt(m.g[node].det()) * w;
    const double y = term - comp;
    const double t = sum + y;
    comp = (t - sum) - y;
    sum = t;
  }
  return sum;
}

double divergence_residual(const TensorGrid& W, const MetricGrid& m) {
  if (W.rank != 1 || W.var[0] != Variance::Contravariant)
    throw Error("divergence_residual: expected a contravariant vector field");
  const auto jets = jet_at_nodes(m);
  const TensorGrid G = gamma_grid(m, jets);
  const TensorGrid dW = covariant_derivative(W, G);
  ScalarGrid div(m.spec);
  parallel_for(m.spec.nodes(), [&](std::int64_t lo, std::int64_t hi) {
    for (std::int64_t node = lo; node < hi; ++node) {
      double s = 0.0;
      for (int i = 0; i < 3; ++i) s += dW.get(node, i * 3 + i);
      div.v[node] = s;
    }
  });
  return std::fabs(integrate(div, m));
}

// --- synthetic fields ------------------------------------------------------

Sym2 TrigMetric::eval(const Vec3& x) const {
  Mat3 g = Mat3::Identity();
  for (const auto& md : modes) {
    const double arg = md.k[0] * x(0) + md.k[1] * x(1) + md.k[2] * x(2) + md.phase;
    g += eps * std::cos(arg) * md.amplitude;
  }
  return Sym2(g, Variance::Covariant);
}

MetricJet2 TrigMetric::analytic_jet(const Vec3& x) const {
  MetricJet2 J;
  J.g = eval(x);
  for (auto& d : J.dg) d.setZero();
  for (auto& row : J.ddg)
    for (auto& d : row) d.setZero();
  for (const auto& md : modes) {
    const double arg = md.k[0] * x(0) + md.k[1] * x(1) + md.k[2] * x(2) + md.phase;
    const double s = std::sin(arg), c = std::cos(arg);
    for (int a = 0; a < 3; ++a) {
      J.dg[a] += -eps * md.k[a] * s * md.amplitude;
      for (int b = 0; b < 3; ++b)
        J.ddg[a][b] += -eps * md.k[a] * md.k[b] * c * md.amplitude;
    }
  }
  return J;
}

namespace {

TrigMode random_mode(std::mt19937_64& rng, int max_freq, bool symmetric) {
  std::uniform_real_distribution<double> ud(-1.0, 1.0);
  std::uniform_int_distribution<int> kd(-max_freq, max_freq);
  TrigMode md;
  Mat3 A;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) A(i, j) = ud(rng);
  md.amplitude = symmetric ? Mat3(0.5 * (A + A.transpose())) : A;
  do {
    for (int a = 0; a < 3; ++a) md.k[a] = kd(rng);
  } while (md.k[0] == 0 && md.k[1] == 0 && md.k[2] == 0);
  md.phase = M_PI * ud(rng);
  return md;
}

}  // namespace

TrigMetric TrigMetric::random(std::uint64_t seed, double eps, int nmodes,
                              int max_freq) {
  for (std::uint64_t attempt = 0; attempt < 64; ++attempt) {
    std::mt19937_64 rng(seed + 0x9e3779b97f4a7c15ULL * attempt);
    TrigMetric tm;
    tm.eps = eps;
    for (int i = 0; i < nmodes; ++i)
      tm.modes.push_back(random_mode(rng, max_freq, true));
    // Probe positivity on a grid finer than any frequency present.
    bool ok = true;
    const int probe = 8 * max_freq;
    for (int ix = 0; ix < probe && ok; ++ix)
      for (int iy = 0; iy < probe && ok; ++iy)
        for (int iz = 0; iz < probe && ok; ++iz) {
          const Vec3 x(2.0 * M_PI * ix / probe, 2.0 * M_PI * iy / probe,
                       2.0 * M_PI * iz / probe);
          if (!tm.eval(x).positive_definite()) ok = false;
        }
    if (ok) return tm;
  }
  throw Error("TrigMetric::random: could not draw a positive definite sample");
}

MetricGrid sample(const TrigMetric& tm, const GridSpec& spec) {
  MetricGrid m(spec);
  parallel_for(spec.nodes(), [&](std::int64_t lo, std::int64_t hi) {
    for (std::int64_t node = lo; node < hi; ++node)
      m.g[node] = tm.eval(spec.coords(node));
  });
  for (std::int64_t node = 0; node < spec.nodes(); ++node)
    if (!m.g[node].positive_definite())
      throw NonPositiveMetric("sample: metric not positive definite at a node");
  return m;
}

Vec3 TrigVectorField::eval(const Vec3& x) const {
  Vec3 w = Vec3::Zero();
  for (const auto& md : modes) {
    const double arg = md.k[0] * x(0) + md.k[1] * x(1) + md.k[2] * x(2) + md.phase;
    w += std::cos(arg) * md.amplitude.col(0);
  }
  return w;
}

TrigVectorField TrigVectorField::random(std::uint64_t seed, int nmodes,
                                        int max_freq) {
  std::mt19937_64 rng(seed);
  TrigVectorField tv;
  for (int i = 0; i < nmodes; ++i)
    tv.modes.push_back(random_mode(rng, max_freq, false));
  return tv;
}

TensorGrid sample(const TrigVectorField& tv, const GridSpec& spec) {
  TensorGrid W(spec, {Variance::Contravariant});
  parallel_for(spec.nodes(), [&](std::int64_t lo, std::int64_t hi) {
    for (std::int64_t node = lo; node < hi; ++node) {
      const Vec3 w = tv.eval(spec.coords(node));
      for (int i = 0; i < 3; ++i) W.at(node, i) = w(i);
    }
  });
  return W;
}

// --- snapshot io -----------------------------------------------------------

namespace {
constexpr char kMagic[8] = {'X', 'C', 'F', 'G', 'R', 'I', 'D', '1'};
}

void write_snapshot(const std::string& path, const MetricGrid& m, double time) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("write_snapshot: cannot open " + path);
  out.write(kMagic, 8);
  const std::int32_t n = m.spec.n, order = m.spec.stencil_order;
  out.write(reinterpret_cast<const char*>(&n), 4);
  out.write(reinterpret_cast<const char*>(&order), 4);
  out.write(reinterpret_cast<const char*>(&time), 8);
  for (std::int64_t node = 0; node < m.spec.nodes(); ++node) {
    const Sym2& g = m.g[node];
    const double rec[6] = {g(0, 0), g(1, 1), g(2, 2), g(1, 2), g(0, 2), g(0, 1)};
    out.write(reinterpret_cast<const char*>(rec), sizeof(rec));
  }
  if (!out) throw Error("write_snapshot: write failed for " + path);
}

MetricGrid read_snapshot(const std::string& path, double* time_out) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("read_snapshot: cannot open " + path);
  char magic[8];
  in.read(magic, 8);
  if (!in || std::memcmp(magic, kMagic, 8) != 0)
    throw Error("read_snapshot: bad magic in " + path);
  std::int32_t n = 0, order = 0;
  double time = 0.0;
  in.read(reinterpret_cast<char*>(&n), 4);
  in.read(reinterpret_cast<char*>(&order), 4);
  in.read(reinterpret_cast<char*>(&time), 8);
  MetricGrid m(GridSpec(n, order));
  for (std::int64_t node = 0; node < m.spec.nodes(); ++node) {
    double rec[6];
    in.read(reinterpret_cast<char*>(rec), sizeof(rec));
    Mat3 g;
    g << rec[0], rec[5], rec[4], rec[5], rec[1], rec[3], rec[4], rec[3], rec[2];
    m.g[node] = Sym2(g, Variance::Covariant);
  }
  if (!in) throw Error("read_snapshot: truncated file " + path);
  if (time_out) *time_out = time;
  return m;
}

}  // namespace xcf
