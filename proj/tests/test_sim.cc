#include <cmath>
#include <limits>
#include <map>
#include <random>

#include <gtest/gtest.h>

#include "commands.h"
#include "containment/hull.h"
#include "containment/sim.h"
#include "support.h"

namespace containment {
namespace {

using testing::bundled;
using testing::v2;

Vec v3(double a, double b, double c) {
  Vec out(3);
  out << a, b, c;
  return out;
}

double segment_distance_scan(const Vec& p, const Vec& a, const Vec& b) {
  const int n = 100000;
  double best = std::numeric_limits<double>::infinity();
  for (int k = 0; k <= n; ++k) {
    const double s = static_cast<double>(k) / n;
    best = std::min(best, (p - (a + s * (b - a))).norm());
  }
  return best;
}

bool in_triangle(const Vec& p, const Vec& a, const Vec& b, const Vec& c) {
  auto cross = [](const Vec& o, const Vec& x, const Vec& y) {
    return (x[0] - o[0]) * (y[1] - o[1]) - (x[1] - o[1]) * (y[0] - o[0]);
  };
  const double d1 = cross(a, b, p), d2 = cross(b, c, p), d3 = cross(c, a, p);
  const bool neg = d1 < 0 || d2 < 0 || d3 < 0;
  const bool pos = d1 > 0 || d2 > 0 || d3 > 0;
  return !(neg && pos);
}

// Zero inside some triangle of the points, otherwise the smallest distance
// to any segment between two points, each scanned on a fine grid.
double brute_hull_distance(const Vec& p, const std::vector<Vec>& pts) {
  if (pts.size() == 1) return (p - pts[0]).norm();
  for (std::size_t i = 0; i < pts.size(); ++i) {
    for (std::size_t j = i + 1; j < pts.size(); ++j) {
      for (std::size_t k = j + 1; k < pts.size(); ++k) {
        if (in_triangle(p, pts[i], pts[j], pts[k])) return 0.0;
      }
    }
  }
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < pts.size(); ++i) {
    for (std::size_t j = i + 1; j < pts.size(); ++j) best = std::min(best, segment_distance_scan(p, pts[i], pts[j]));
  }
  return best;
}

TEST(Hull, Examples) {
  const std::vector<Vec> tri = {v2(0, 0), v2(1, 0), v2(0, 1)};
  EXPECT_NEAR(hull_distance(v2(1, 0), tri), 0.0, 1e-12);
  EXPECT_NEAR(hull_distance(v2(2, 0), tri), 1.0, 1e-12);
  EXPECT_NEAR(hull_distance(v2(0.2, 0.2), tri), 0.0, 1e-12);
  EXPECT_NEAR(hull_distance(v2(1, 1), tri), std::sqrt(0.5), 1e-12);
  EXPECT_NEAR(hull_distance_iterative(v2(2, 0), tri), 1.0, 1e-6);
  EXPECT_NEAR(hull_distance(v2(3, 4), {v2(0, 0)}), 5.0, 1e-12);
}

TEST(Hull, ConvexHullCollinearAndDuplicates) {
  const auto h = convex_hull_2d({{0, 0}, {1, 1}, {2, 2}, {1, 1}});
  ASSERT_EQ(h.size(), 2u);
  const auto sq = convex_hull_2d({{0, 0}, {1, 0}, {1, 1}, {0, 1}, {0.5, 0.5}});
  EXPECT_EQ(sq.size(), 4u);
}

TEST(HullProperty, MatchesBruteForceIn2D) {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(-3, 3);
  for (int trial = 0; trial < 60; ++trial) {
    const int k = 1 + static_cast<int>(rng() % 5);
    std::vector<Vec> pts;
    for (int i = 0; i < k; ++i) pts.push_back(v2(u(rng), u(rng)));
    const Vec p = v2(2 * u(rng), 2 * u(rng));
    const double oracle = brute_hull_distance(p, pts);
    EXPECT_NEAR(hull_distance(p, pts), oracle, 1e-4) << "trial " << trial;
    EXPECT_NEAR(hull_distance_iterative(p, pts), oracle, 1e-4) << "trial " << trial;
  }
}

// A planar point set lifted into 3D: the distance is the planar distance
// combined with the height offset.
TEST(HullProperty, IterativeMatchesLiftedPlanarCase) {
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> u(-2, 2);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<Vec> flat, lifted;
    const int k = 2 + static_cast<int>(rng() % 6);
    for (int i = 0; i < k; ++i) {
      const double a = u(rng), b = u(rng);
      flat.push_back(v2(a, b));
      lifted.push_back(v3(a, b, 0.5));
    }
    const double a = 2 * u(rng), b = 2 * u(rng), h = u(rng);
    const double d2 = hull_distance(v2(a, b), flat);
    const double expected = std::sqrt(d2 * d2 + (h - 0.5) * (h - 0.5));
    EXPECT_NEAR(hull_distance(v3(a, b, h), lifted), expected, 1e-6) << "trial " << trial;
  }
}

Scenario scenario_from(const cli::Config& cfg) { return cli::to_scenario(cfg); }

TEST(ContainmentError, ZeroAtWeightedCombination) {
  const Scenario sc = scenario_from(bundled("example1_fullstate"));
  const auto part = partition(sc.topology());
  const Eigen::MatrixXd w = containment_weights(part).w;
  std::vector<Vec> pos(10);
  for (int l = 0; l < 4; ++l) pos[static_cast<std::size_t>(6 + l)] = v2(l * 1.5 - 2, l * l * 0.3);
  for (int i = 0; i < 6; ++i) {
    Vec target = v2(0, 0);
    for (int l = 0; l < 4; ++l) target += w(i, l) * pos[static_cast<std::size_t>(6 + l)];
    pos[static_cast<std::size_t>(i)] = target;
  }
  EXPECT_LT(containment_error(w, pos, 6).norm, 1e-12);
}

TEST(ContainmentError, SingleLeaderReducesToDifference) {
  Eigen::MatrixXd w(2, 1);
  w << 1, 1;
  const auto e = containment_error(w, {v2(1, 2), v2(-1, 0), v2(0.5, 0.5)}, 2);
  EXPECT_NEAR(e.stacked[0], 0.5, 1e-15);
  EXPECT_NEAR(e.stacked[1], 1.5, 1e-15);
  EXPECT_NEAR(e.stacked[2], -1.5, 1e-15);
  EXPECT_NEAR(e.stacked[3], -0.5, 1e-15);
}

TEST(Scenario, GridValidation) {
  Scenario sc = scenario_from(bundled("example1_fullstate"));
  EXPECT_NO_THROW(sc.validate());
  sc.dt = 0.03;
  EXPECT_THROW(sc.validate(), ConfigError);  // does not divide T
  sc.dt = 0.05;
  EXPECT_THROW(sc.validate(), ConfigError);  // coarser than T / 10
  sc = scenario_from(bundled("example1_fullstate"));
  sc.record_interval = 0.015;
  EXPECT_THROW(sc.validate(), ConfigError);
}

TEST(Run, ZeroInputIsExactForDoubleIntegrators) {
  cli::Config cfg = bundled("example1_fullstate");
  cfg.sim.t_end_seconds = 5.0;
  for (int i = 0; i < 6; ++i) cfg.agents[static_cast<std::size_t>(i)].v = {0.3 * i - 1, 0.7};
  Scenario sc = scenario_from(cfg);
  sc.controllers_enabled = false;
  const Trace tr = run(sc, 1);
  for (const auto& s : tr.samples) {
    for (int i = 0; i < 6; ++i) {
      const auto& a = sc.agents[static_cast<std::size_t>(i)];
      const Vec expected = a.p0 + a.v0 * s.t;
      EXPECT_LT((s.p[static_cast<std::size_t>(i)] - expected).cwiseAbs().maxCoeff(), 1e-12);
    }
  }
}

TEST(Run, DivergenceGuardReportsAgent) {
  cli::Config cfg = bundled("example2_nonlinear");
  cfg.sim.t_end_seconds = 3.0;
  cfg.agents[2].v = {1.0, 1.0};  // v' = v^2 blows up at t = 1 without control
  Scenario sc = scenario_from(cfg);
  sc.controllers_enabled = false;
  try {
    run(sc, 1);
    FAIL() << "expected divergence";
  } catch (const DivergenceError& e) {
    EXPECT_EQ(e.agent(), 2);
    EXPECT_LT(e.time(), 1.01);
    EXPECT_GT(e.time(), 0.9);
  }
}

TEST(Run, StationaryLeadersKnownZeroVelocityIdealLinks) {
  cli::Config cfg = bundled("example1_fullstate");
  cfg.comm.drop_prob = 0.0;
  cfg.comm.delay_max_seconds = 0.0;
  cfg.sim.t_end_seconds = 30.0;
  for (std::size_t l = 6; l < 10; ++l) cfg.agents[l].trajectory->kind = "stationary";
  cfg.controllers[0].variant = "known_vd_full_state";
  cfg.controllers[0].v_d = {0.0, 0.0};
  const Trace tr = run(scenario_from(cfg), 3);
  const auto& last = tr.samples.back();
  EXPECT_LT(last.pos_error.norm(), 1e-3);
  for (double h : last.hull) EXPECT_LT(h, 1e-3);
}

TEST(Run, DeterministicTraces) {
  cli::Config cfg = bundled("example1_outputfb");
  cfg.sim.t_end_seconds = 8.0;
  const Scenario sc = scenario_from(cfg);
  const std::string a = cli::trace_csv(run(sc, 42));
  const std::string b = cli::trace_csv(run(sc, 42));
  const std::string c = cli::trace_csv(run(sc, 43));
  EXPECT_EQ(a, b);
  EXPECT_NE(a, c);
}

TEST(Run, SeriesShareTheRecordGrid) {
  cli::Config cfg = bundled("oscillator_output");
  cfg.sim.t_end_seconds = 3.05;
  cfg.sim.record_interval_seconds = 0.2;
  const Trace tr = run(scenario_from(cfg), 5);
  ASSERT_EQ(tr.samples.size(), 17u);  // 0, 0.2, ..., 3.0 and the final 3.05
  EXPECT_NEAR(tr.samples.back().t, 3.05, 1e-12);
  for (const auto& s : tr.samples) {
    EXPECT_EQ(s.p.size(), 10u);
    EXPECT_EQ(s.internal.size(), 6u);
    EXPECT_EQ(s.hull.size(), 6u);
    EXPECT_EQ(s.pos_error.size(), 12);
  }
  EXPECT_NO_THROW(sample_at(tr, 1.0));
  EXPECT_THROW(sample_at(tr, 1.1), std::out_of_range);
}

// Every sequence number a follower holds was delivered through the audit
// log no later than the time it is observed.
TEST(Run, AuditLogExplainsMailboxContents) {
  cli::Config cfg = bundled("example1_fullstate");
  cfg.sim.t_end_seconds = 10.0;
  const Trace tr = run(scenario_from(cfg), 9);
  std::vector<Edge> edges;
  for (const auto& s : tr.schedules) edges.push_back(s.edge);
  std::map<std::pair<int, std::int64_t>, double> accepted;  // (edge, seq) -> applied time
  for (const auto& d : tr.audit) {
    EXPECT_GE(d.applied_time + 1e-12, d.arrival_time);
    EXPECT_LT(d.applied_time - d.arrival_time, tr.dt + 1e-9);
    if (!d.accepted) continue;
    const auto e = std::find(edges.begin(), edges.end(), d.edge) - edges.begin();
    accepted[{static_cast<int>(e), d.seq}] = d.applied_time;
  }
  std::vector<std::int64_t> last(edges.size(), -1);
  for (const auto& s : tr.samples) {
    for (std::size_t e = 0; e < edges.size(); ++e) {
      const auto seq = s.mailbox_seq[e];
      EXPECT_GE(seq, last[e]);
      last[e] = seq;
      if (seq < 0) continue;
      const auto it = accepted.find({static_cast<int>(e), seq});
      ASSERT_NE(it, accepted.end());
      EXPECT_LE(it->second, s.t + 1e-9);
      EXPECT_LE(s.t - static_cast<double>(seq) * cfg.comm.T_seconds,
                cfg.comm.T_star_seconds + cfg.comm.T_seconds + 1e-9);
    }
  }
}

TEST(Run, IdealLinksErrorDecaysAfterTransient) {
  cli::Config cfg = bundled("example1_fullstate");
  cfg.comm.drop_prob = 0.0;
  cfg.comm.delay_max_seconds = 0.0;
  cfg.comm.T_seconds = 0.01;
  cfg.comm.delay_quantum_seconds = 0.01;
  cfg.sim.dt_seconds = 0.001;
  cfg.sim.record_interval_seconds = 0.5;
  cfg.sim.t_end_seconds = 20.0;
  for (std::size_t l = 6; l < 10; ++l) {
    cfg.agents[l].trajectory->kind = "constant_velocity";
  }
  const Trace tr = run(scenario_from(cfg), 1);
  double prev = std::numeric_limits<double>::infinity();
  for (const auto& s : tr.samples) {
    if (s.t < 5.0) continue;
    const double e = s.pos_error.norm();
    EXPECT_LE(e, prev * (1 + 1e-9) + 1e-12) << "t " << s.t;
    prev = e;
  }
}

}  // namespace
}  // namespace containment
