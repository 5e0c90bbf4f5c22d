#include <doctest.h>

#include <cmath>
#include <set>

#include "percept/anchors.hpp"
#include "percept/image_io.hpp"
#include "percept/model_files.hpp"
#include "percept/perturbation.hpp"
#include "percept/render.hpp"
#include "percept/shap.hpp"
#include "percept/surrogate.hpp"
#include "test_support.hpp"

using namespace percept;
using namespace percept::testing;

namespace {

struct TabularFixture {
  LinearTabularModel model = load_linear_tabular_model(fixture("adult_linear.json"));
  std::shared_ptr<const Dataset> data =
      std::make_shared<const Dataset>(ingest_csv(fixture("adult.csv"), model.csv_hints()));
};

// Additive game v(S) = c + sum_{i in S} a_i with a counter on calls.
struct AdditiveGame {
  Eigen::VectorXd a;
  double c = 0.3;
  std::shared_ptr<int> calls = std::make_shared<int>(0);
  std::shared_ptr<int> rows = std::make_shared<int>(0);

  CoalitionFunction fn() const {
    return [self = *this](const Eigen::MatrixXd& z) {
      ++*self.calls;
      *self.rows += static_cast<int>(z.rows());
      return Eigen::VectorXd((z * self.a).array() + self.c);
    };
  }
};

}  // namespace

TEST_CASE("grid segmentation") {
  const SegmentMap s = grid_segment(16, 16, 4, 4);
  CHECK(s.count == 16);
  std::vector<int> sizes(16, 0);
  for (int l : s.labels) ++sizes[static_cast<std::size_t>(l)];
  CHECK(sizes == std::vector<int>(16, 16));
  CHECK(s.at(0, 0) == 0);
  CHECK(s.at(0, 15) == 3);
  CHECK(s.at(15, 0) == 12);
  const SegmentMap odd = grid_segment(7, 5, 3, 2);
  CHECK(odd.count == 6);
  CHECK(std::set<int>(odd.labels.begin(), odd.labels.end()).size() == 6);
  CHECK(code_of([] { grid_segment(16, 16, 0, 4); }) == ErrorCode::kInvalidGrid);
  CHECK(code_of([] { grid_segment(4, 4, 5, 1); }) == ErrorCode::kInvalidGrid);
}

TEST_CASE("mask sampling and cosine distance") {
  const Eigen::MatrixXd m = sample_masks(6, 50, 3);
  CHECK(m.row(0).isOnes());
  CHECK(((m.array() == 0.0) || (m.array() == 1.0)).all());
  CHECK(m == sample_masks(6, 50, 3));
  CHECK_FALSE(m == sample_masks(6, 50, 4));
  CHECK(cosine_distance_to_ones(Eigen::RowVector2d(1, 0)) == doctest::Approx(1.0 - 1.0 / std::sqrt(2.0)));
  CHECK(cosine_distance_to_ones(Eigen::RowVector3d(1, 1, 1)) == doctest::Approx(0.0).scale(1.0));
  CHECK(cosine_distance_to_ones(Eigen::RowVector3d(0, 0, 0)) == 1.0);
}

TEST_CASE("text instance features and reconstruction") {
  CountingTextPredictor pred{3, [](const std::vector<bool>&) { return 0.5; }};
  const TextInstance t(pred.predictor(), "The cat saw the dog");
  CHECK(t.dimension() == 4);
  CHECK(t.feature_name(0) == "the");
  CHECK(t.feature_name(3) == "dog");
  // removed tokens leave their surrounding whitespace behind
  CHECK(t.reconstruct(Eigen::RowVector4d(0, 1, 1, 1)) == " cat saw  dog");
  CHECK(t.reconstruct(Eigen::RowVector4d(1, 1, 0, 1)) == "The cat  the dog");
  CHECK(code_of([&] { TextInstance(pred.predictor(), "   "); }) == ErrorCode::kInvalidArgument);
}

TEST_CASE("image instance fills switched-off segments with the mean") {
  const Tensor img = random_tensor({1, 4, 4}, 9);
  const ImageInstance inst(network_predictor(Network({1, 4, 4}, {make_flatten("f"), make_dense("d", 16, 2)})), img,
                           grid_segment(4, 4, 2, 2));
  double mean = 0.0;
  for (float v : img.data()) mean += v;
  mean /= 16.0;
  const Tensor r = inst.reconstruct(Eigen::RowVector4d(1, 0, 1, 1));
  for (int y = 0; y < 4; ++y) {
    for (int x = 0; x < 4; ++x) {
      if (y < 2 && x >= 2) {
        CHECK(r.at(0, y, x) == doctest::Approx(mean).epsilon(1e-6));
      } else {
        CHECK(r.at(0, y, x) == img.at(0, y, x));
      }
    }
  }
}

TEST_CASE("weighted ridge matches the augmented normal equations") {
  Rng rng(12);
  Eigen::MatrixXd x(40, 5);
  Eigen::VectorXd y(40), w(40);
  for (int i = 0; i < 40; ++i) {
    for (int j = 0; j < 5; ++j) x(i, j) = rng.uniform(-1, 1);
    y[i] = rng.uniform(-1, 1);
    w[i] = rng.uniform(0.1, 1);
  }
  for (double lambda : {0.0, 0.5, 3.0}) {
    Eigen::MatrixXd a(40, 6);
    a << Eigen::VectorXd::Ones(40), x;
    Eigen::MatrixXd lhs = a.transpose() * w.asDiagonal() * a;
    lhs.diagonal().tail(5).array() += lambda;
    const Eigen::VectorXd sol = lhs.ldlt().solve(a.transpose() * w.asDiagonal() * y);
    const RidgeFit fit = weighted_ridge(x, y, w, lambda);
    CHECK(fit.intercept == doctest::Approx(sol[0]).epsilon(1e-9));
    for (int j = 0; j < 5; ++j) CHECK(fit.coefficients[j] == doctest::Approx(sol[j + 1]).epsilon(1e-9));
  }
  CHECK(code_of([&] { weighted_ridge(x, y, -w, 1.0); }) == ErrorCode::kInvalidArgument);
}

TEST_CASE("LIME uses one predictor call and the exponential kernel") {
  CountingTextPredictor pred{6, [](const std::vector<bool>& z) { return 0.1 + 0.6 * z[2] + 0.1 * (z[0] && z[1]); }};
  const TextInstance t(pred.predictor(), numbered_tokens(6));
  const Explanation e = lime_explain(t, 1, {.num_samples = 300, .top_k = 6, .seed = 2});
  CHECK(*pred.calls == 1);
  CHECK(*pred.rows == 300);
  CHECK(e.method == "lime");
  CHECK(e.n_samples == 300);
  CHECK(e.weights.front().feature == 2);
  CHECK(e.label_probability == doctest::Approx(0.8));

  // Same sample refit by hand.
  const PerturbationBatch batch = t.sample(300, 2);
  Eigen::VectorXd w(300);
  for (int i = 0; i < 300; ++i) w[i] = std::exp(-batch.distances[i] * batch.distances[i] / (0.25 * 0.25));
  const RidgeFit fit = weighted_ridge(batch.design, batch.probs.col(1), w, 1.0);
  for (const auto& fw : e.weights) CHECK(fw.weight == doctest::Approx(fit.coefficients[fw.feature]).epsilon(1e-12));
  CHECK(e.intercept == doctest::Approx(fit.intercept).epsilon(1e-12));

  const std::vector<int> labels{0, 1};
  const auto both = lime_explain_labels(t, labels, {.num_samples = 300, .top_k = 6, .seed = 2});
  CHECK(*pred.calls == 3);  // one for the batch refit above, one here
  REQUIRE(both.size() == 2);
  for (std::size_t i = 0; i < 6; ++i) {
    CHECK(both[0].weights[i].feature == both[1].weights[i].feature);
    CHECK(both[0].weights[i].weight == doctest::Approx(-both[1].weights[i].weight).epsilon(1e-9));
  }
}

TEST_CASE("top-k ordering and label ranking") {
  const auto k = top_k_features({{0, "a", 0.5}, {1, "b", -0.9}, {2, "c", 0.5}, {3, "d", 0.1}}, 3);
  REQUIRE(k.size() == 3);
  CHECK(k[0].feature == 1);
  CHECK(k[1].feature == 0);
  CHECK(k[2].feature == 2);
  CHECK(top_k_features(k, -1).size() == 3);
  CHECK(top_labels(Eigen::RowVector4d(0.1, 0.4, 0.1, 0.4), 3) == std::vector<int>{1, 3, 0});
}

TEST_CASE("CLE pair terms and singleton projection") {
  CountingTextPredictor pred{4, [](const std::vector<bool>& z) { return 0.1 + 0.2 * z[0] + 0.4 * (z[0] && z[3]); }};
  const TextInstance t(pred.predictor(), numbered_tokens(4));
  const Explanation e = cle_explain(t, 1, {.num_samples = 200, .ridge_lambda = 0.0, .top_k = 4, .seed = 1});
  CHECK(e.method == "cle");
  CHECK(*pred.calls == 1);
  CHECK(e.pairs.size() == 6);
  std::map<std::pair<int, int>, double> pair;
  for (const auto& p : e.pairs) pair[{p.i, p.j}] = p.weight;
  CHECK(pair[{0, 3}] == doctest::Approx(0.4).epsilon(1e-9));
  std::map<int, double> single;
  for (const auto& w : e.weights) single[w.feature] = w.weight;
  for (const auto& s : e.singleton_projection) {
    double want = single[s.feature];
    for (const auto& p : e.pairs) {
      if (p.i == s.feature || p.j == s.feature) want += 0.5 * p.weight;
    }
    CHECK(s.weight == doctest::Approx(want).epsilon(1e-12));
  }
  CountingTextPredictor wide{10, [](const std::vector<bool>&) { return 0.5; }};
  const TextInstance w(wide.predictor(), numbered_tokens(10));
  CHECK(code_of([&] { cle_explain(w, 1, {.num_samples = 50}); }) == ErrorCode::kDesignTooLarge);
  CHECK(code_of([&] { lime_explain(w, 2, {.num_samples = 50}); }) == ErrorCode::kInvalidTarget);
}

TEST_CASE("Kernel SHAP call budget and sampling modes") {
  AdditiveGame g{Eigen::VectorXd::LinSpaced(12, -0.5, 0.6)};
  const ShapValues s = kernel_shap(g.fn(), 12, {.num_samples = 500, .seed = 1});
  CHECK(*g.calls == 2);
  CHECK(s.evaluations == *g.rows);
  CHECK(s.evaluations == 502);
  for (int i = 0; i < 12; ++i) CHECK(s.phi[i] == doctest::Approx(g.a[i]).epsilon(1e-9));
  CHECK(s.base_value == doctest::Approx(0.3));
  CHECK(s.fit_quality == doctest::Approx(1.0));

  AdditiveGame small{Eigen::VectorXd::LinSpaced(4, 0.1, 0.4)};
  const ShapValues e = kernel_shap(small.fn(), 4, {.num_samples = 100});
  CHECK(e.evaluations == 16);  // all 2^4 coalitions
  CHECK(code_of([&] { kernel_shap(g.fn(), 15, {.exact = true}); }) == ErrorCode::kTooManyFeaturesForExact);
  CHECK(code_of([&] { kernel_shap(g.fn(), 12, {.num_samples = 0}); }) == ErrorCode::kInvalidArgument);
}

TEST_CASE("Shapley oracles agree") {
  Rng rng(31);
  for (int d = 1; d <= 7; ++d) {
    std::vector<double> table(std::size_t{1} << d);
    for (auto& v : table) v = rng.uniform(-2, 2);
    const Eigen::VectorXd perm = exact_shapley_oracle([&](std::uint32_t m) { return table[m]; }, d);
    const std::vector<double> subset = shapley_by_subsets(table, d);
    const std::vector<double> orders = shapley_by_permutations(table, d);
    for (int i = 0; i < d; ++i) {
      CHECK(perm[i] == doctest::Approx(subset[static_cast<std::size_t>(i)]).epsilon(1e-12));
      CHECK(orders[static_cast<std::size_t>(i)] == doctest::Approx(subset[static_cast<std::size_t>(i)]).epsilon(1e-12));
    }
  }
}

TEST_CASE("Kernel SHAP on instances satisfies efficiency") {
  CountingTextPredictor pred{5, [](const std::vector<bool>& z) { return 0.2 + 0.3 * z[1] + 0.2 * (z[2] && z[4]); }};
  const TextInstance t(pred.predictor(), numbered_tokens(5));
  const Explanation e = kernel_shap_explain(t, 1, {.exact = true, .top_k = 5});
  CHECK(*pred.calls == 2);
  double sum = e.intercept;
  for (const auto& w : e.weights) sum += w.weight;
  CHECK(sum == doctest::Approx(0.7).epsilon(1e-12));
  std::map<int, double> phi;
  for (const auto& w : e.weights) phi[w.feature] = w.weight;
  CHECK(phi[1] == doctest::Approx(0.3));
  CHECK(phi[2] == doctest::Approx(0.1));
  CHECK(phi[4] == doctest::Approx(0.1));
  CHECK(phi[0] == doctest::Approx(0.0).scale(1.0));

  TabularFixture tf;
  const TabularInstance row(tf.model.predictor(), tf.data, tf.data->row(3), false);
  const Explanation r = kernel_shap_explain(row, 1, {.exact = true, .top_k = -1});
  double total = r.intercept;
  for (const auto& w : r.weights) total += w.weight;
  CHECK(total == doctest::Approx(r.label_probability).epsilon(1e-10));
}

TEST_CASE("tabular perturbation") {
  TabularFixture tf;
  const TabularRow inst = tf.data->row(5);
  for (bool disc : {true, false}) {
    const TabularPerturbation p = perturb_tabular(inst, *tf.data, 200, 4, disc);
    CHECK(p.rows.rows() == 200);
    for (int c = 0; c < 6; ++c) CHECK(p.rows(0, c) == inst[static_cast<std::size_t>(c)]);
    CHECK(p.indicators.row(0).isOnes());
    for (int i = 0; i < 200; ++i) {
      for (int c : {4, 5}) {
        CHECK(p.indicators(i, c) == (p.rows(i, c) == inst[static_cast<std::size_t>(c)] ? 1.0 : 0.0));
      }
      if (disc) {
        const auto& q = tf.data->stats(0).quartiles;
        CHECK(p.indicators(i, 0) == (quartile_bin(q, p.rows(i, 0)) == quartile_bin(q, inst[0]) ? 1.0 : 0.0));
      }
    }
  }
  const TabularInstance ti(tf.model.predictor(), tf.data, inst, true);
  Rng rng(3);
  const std::vector<int> fixed{0, 4};
  const AnchorSample s = ti.sample_anchor(fixed, 100, rng);
  CHECK(s.indicators.col(0).isOnes());
  CHECK(s.indicators.col(4).isOnes());
  CHECK(ti.default_kernel_width() == doctest::Approx(std::sqrt(6.0) * 0.75));
  CHECK(ti.feature_name(4) == "sex=Female");
}

TEST_CASE("anchors") {
  CHECK(hoeffding_lower_bound(0.9, 200, 0.05) == doctest::Approx(0.9 - std::sqrt(std::log(20.0) / 400.0)));

  CountingTextPredictor constant{4, [](const std::vector<bool>&) { return 0.99; }};
  const TextInstance c(constant.predictor(), numbered_tokens(4));
  const AnchorResult empty = anchors_explain(c, 1, {.seed = 1});
  CHECK(empty.predicates.empty());
  CHECK_FALSE(empty.below_target);
  CHECK(empty.coverage == 1.0);

  CountingTextPredictor needs_t2{5, [](const std::vector<bool>& z) { return z[2] ? 0.9 : 0.1; }};
  const TextInstance n(needs_t2.predictor(), numbered_tokens(5));
  const AnchorResult r = anchors_explain(n, 1, {.seed = 2});
  REQUIRE(r.predicates.size() == 1);
  CHECK(r.predicates[0].feature == 2);
  CHECK(r.predicates[0].text == "token 't2' present");
  CHECK(r.precision_lower_bound >= 0.95);
  CHECK(r.coverage == doctest::Approx(0.5).epsilon(0.1));

  // Every rule is a coin flip: no anchor reaches the target.
  const TextPredictor coin([](std::span<const std::string> texts) {
    ProbMatrix out(static_cast<Eigen::Index>(texts.size()), 2);
    for (std::size_t i = 0; i < texts.size(); ++i) {
      const double h = static_cast<double>(std::hash<std::string>{}(texts[i] + std::to_string(i)) % 2);
      out.row(static_cast<Eigen::Index>(i)) << h, 1.0 - h;
    }
    return out;
  }, 2);
  const TextInstance f(coin, numbered_tokens(3));
  const AnchorResult b = anchors_explain(f, 0, {.seed = 3});
  CHECK(b.below_target);
  CHECK(code_of([&] { anchors_explain(f, 0, {.precision_target = 1.0}); }) == ErrorCode::kInvalidArgument);
  CHECK(code_of([&] { anchors_explain(f, 2, {}); }) == ErrorCode::kInvalidTarget);
}

TEST_CASE("golden tabular CLE bar chart") {
  TabularFixture tf;
  const TabularInstance ti(tf.model.predictor(), tf.data, tf.data->row(0), true);
  const Explanation e = cle_explain(ti, 1, {.num_samples = 1000, .top_k = 6, .seed = 0});
  CHECK(matches_golden("cle_adult_row0.ppm", encode_pnm(render_bars(e.singleton_projection, ">50K"))));
}

TEST_CASE("grid and mask edge cases") {
  const SegmentMap halves = grid_segment(16, 16, 1, 2);
  CHECK(halves.count == 2);
  CHECK(halves.at(15, 7) == 0);
  CHECK(halves.at(0, 8) == 1);
  const SegmentMap pixels = grid_segment(16, 16, 16, 16);
  CHECK(pixels.count == 256);
  for (int i = 0; i < 256; ++i) CHECK(pixels.labels[static_cast<std::size_t>(i)] == i);
  CHECK(sample_masks(10, 50, 3, 1.0).isOnes());
  const Eigen::VectorXd means = sample_masks(10, 10000, 4).colwise().mean();
  for (int j = 0; j < 10; ++j) CHECK(std::abs(means(j) - 0.5) < 0.02);
}

TEST_CASE("LIME on constant and single-feature predictors") {
  LimeOptions opt;
  opt.num_samples = 400;
  opt.ridge_lambda = 0.0;
  const CountingTextPredictor flat{6, [](const std::vector<bool>&) { return 0.7; }};
  const Explanation c = lime_explain(TextInstance(flat.predictor(), numbered_tokens(6)), 1, opt);
  for (const auto& w : c.weights) CHECK(std::abs(w.weight) < 1e-9);
  CHECK(c.fit_quality == 0.0);

  const CountingTextPredictor one{6, [](const std::vector<bool>& z) { return 0.1 + 0.2 * z[3]; }};
  const Explanation e = lime_explain(TextInstance(one.predictor(), numbered_tokens(6)), 1, opt);
  CHECK(e.intercept == doctest::Approx(0.1));
  for (const auto& w : e.weights) CHECK(w.weight == doctest::Approx(w.feature == 3 ? 0.2 : 0.0).epsilon(1e-9));
  CHECK(e.fit_quality == doctest::Approx(1.0));
}

TEST_CASE("LIME explains the requested number of top labels") {
  const Network net = build_reference_cnn(7);
  const Tensor digit = read_image(fixture("digit0.pgm"));
  const ImageInstance inst(network_predictor(net), digit, grid_segment(16, 16, 4, 4));
  LimeOptions opt;
  opt.num_samples = 200;
  const std::vector<Explanation> ex = lime_explain_top(inst, 3, opt);
  REQUIRE(ex.size() == 3);
  const std::vector<int> want = top_labels(inst.evaluate_coalitions(Eigen::MatrixXd::Ones(1, 16)).row(0), 3);
  for (std::size_t i = 0; i < 3; ++i) CHECK(ex[i].label == want[i]);
}

TEST_CASE("Shapley special games") {
  ShapOptions exact;
  exact.exact = true;
  const ShapValues one = kernel_shap([](const Eigen::MatrixXd& z) { return Eigen::VectorXd((0.2 + 0.5 * z.col(0).array()).matrix()); },
                                     1, exact);
  CHECK(one.phi(0) == doctest::Approx(0.5));
  const ShapValues sym = kernel_shap(
      [](const Eigen::MatrixXd& z) { return Eigen::VectorXd(z.rowwise().sum().array().square().matrix()); }, 4, exact);
  for (int i = 0; i < 4; ++i) CHECK(sym.phi(i) == doctest::Approx(4.0));
  const ShapValues unanimity =
      kernel_shap([](const Eigen::MatrixXd& z) { return Eigen::VectorXd(z.rowwise().prod()); }, 3, exact);
  for (int i = 0; i < 3; ++i) CHECK(unanimity.phi(i) == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("Kernel SHAP on a tabular model linear in its inputs") {
  const TabularFixture f;
  const std::vector<double> w{0.001, 0.01, 0.001, 1e-5, 0.05, 0.02};
  const TabularRow x = f.data->row(0), b = f.data->row(1);
  const TabularPredictor linear(
      [w, b](std::span<const TabularRow> rows) {
        ProbMatrix p(static_cast<Eigen::Index>(rows.size()), 2);
        for (std::size_t r = 0; r < rows.size(); ++r) {
          double p1 = 0.5;
          for (std::size_t i = 0; i < w.size(); ++i) p1 += w[i] * (rows[r][i] - b[i]);
          p(static_cast<Eigen::Index>(r), 1) = p1;
          p(static_cast<Eigen::Index>(r), 0) = 1.0 - p1;
        }
        return p;
      },
      2);
  const TabularInstance inst(linear, f.data, x, true, b);
  ShapOptions exact;
  exact.exact = true;
  const Explanation e = kernel_shap_explain(inst, 1, exact);
  for (const auto& fw : e.weights) {
    const auto i = static_cast<std::size_t>(fw.feature);
    CHECK(fw.weight == doctest::Approx(w[i] * (x[i] - b[i])).epsilon(1e-9));
  }
}

TEST_CASE("CLE on linear and pure-interaction predictors") {
  LimeOptions opt;
  opt.num_samples = 500;
  opt.ridge_lambda = 0.0;
  const CountingTextPredictor lin{4, [](const std::vector<bool>& z) { return 0.2 + 0.1 * z[0] + 0.15 * z[2]; }};
  const TextInstance li(lin.predictor(), numbered_tokens(4));
  const Explanation cle = cle_explain(li, 1, opt);
  const Explanation lime = lime_explain(li, 1, opt);
  for (const auto& p : cle.pairs) CHECK(std::abs(p.weight) < 1e-9);
  std::vector<double> cw(4), lw(4);
  for (const auto& fw : cle.weights) cw[static_cast<std::size_t>(fw.feature)] = fw.weight;
  for (const auto& fw : lime.weights) lw[static_cast<std::size_t>(fw.feature)] = fw.weight;
  for (std::size_t i = 0; i < 4; ++i) CHECK(cw[i] == doctest::Approx(lw[i]).epsilon(1e-9));

  const CountingTextPredictor inter{4, [](const std::vector<bool>& z) { return 0.25 + 0.5 * (z[1] && z[2]); }};
  const Explanation e = cle_explain(TextInstance(inter.predictor(), numbered_tokens(4)), 1, opt);
  for (const auto& p : e.pairs) CHECK(p.weight == doctest::Approx(p.i == 1 && p.j == 2 ? 0.5 : 0.0).epsilon(1e-9));
  for (const auto& fw : e.weights) CHECK(std::abs(fw.weight) < 1e-9);
}

TEST_CASE("anchors on a constant predictor need no predicates") {
  const CountingTextPredictor flat{5, [](const std::vector<bool>&) { return 0.9; }};
  const AnchorResult r = anchors_explain(TextInstance(flat.predictor(), numbered_tokens(5)), 1, AnchorOptions{});
  CHECK(r.predicates.empty());
  CHECK(r.precision == 1.0);
  CHECK_FALSE(r.below_target);
}

TEST_CASE("tabular perturbation frequencies") {
  const TabularFixture f;
  const TabularRow x = f.data->row(0);
  const TabularPerturbation p = perturb_tabular(x, *f.data, 10000, 9, true);
  const auto code = static_cast<std::size_t>(x[5]);
  CHECK(std::abs(p.indicators.col(5).mean() - f.data->stats(5).frequencies[code]) < 0.02);
  const Dataset flat = parse_csv("a,b\n1,5\n2,5\n3,5\n4,5\n", {});
  CHECK(perturb_tabular(flat.row(0), flat, 500, 1, true).indicators.col(1).isOnes());
}
