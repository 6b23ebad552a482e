#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>
#include <utility>
#include <vector>

#include "dua/adam.hpp"
#include "dua/data.hpp"
#include "dua/errors.hpp"
#include "dua/model.hpp"

using namespace dua;

namespace {

MultiViewDataset tiny_dataset(std::uint64_t seed, std::size_t n, std::vector<std::size_t> widths) {
    Rng rng(seed);
    MultiViewDataset data;
    for (std::size_t w : widths) {
        data.views.push_back(rng.gaussian(n, w));
        data.view_names.push_back("v" + std::to_string(data.views.size()));
    }
    return data;
}

// Predictions that echo fixed mu / log_sigma values.
std::vector<ViewPrediction> fixed_preds(const MultiViewDataset& data, double log_sigma) {
    std::vector<ViewPrediction> preds;
    for (const Matrix& view : data.views) {
        ViewPrediction p;
        p.mu = Matrix(view.rows(), view.cols());
        p.log_sigma.assign(view.rows(), log_sigma);
        preds.push_back(std::move(p));
    }
    return preds;
}

void randomize_biases(MlpParams& p, Rng& rng, double scale = 0.1) {
    for (Matrix* b : {&p.b1, &p.b2, &p.b3})
        for (auto& x : b->values()) x = scale * rng.normal();
}

double rel_err(double a, double b) {
    return std::fabs(a - b) / std::max({std::fabs(a), std::fabs(b), 1e-2});
}

}  // namespace

TEST_CASE("init_model determinism and shapes") {
    ModelShape shape;
    shape.latent_dim = 3;
    Rng r1(7), r2(7);
    auto [nets1, lat1] = init_model({6, 4}, shape, 10, r1);
    auto [nets2, lat2] = init_model({6, 4}, shape, 10, r2);
    CHECK(lat1.h == lat2.h);
    CHECK(nets1[0].mean_head.w1 == nets2[0].mean_head.w1);
    CHECK(nets1[1].sigma_head.w3 == nets2[1].sigma_head.w3);

    CHECK(lat1.h.rows() == 10);
    CHECK(lat1.h.cols() == 3);
    CHECK(nets1.size() == 2);
    CHECK(nets1[0].mean_head.in_width() == 3);
    CHECK(nets1[0].mean_head.out_width() == 6);
    CHECK(nets1[1].mean_head.out_width() == 4);
    CHECK(nets1[0].sigma_head.out_width() == 1);
    CHECK(nets1[1].sigma_head.out_width() == 1);
    // Default hidden widths grow toward the output.
    CHECK(nets1[0].mean_head.hidden1() == 16);
    CHECK(nets1[0].mean_head.hidden2() == 32);
}

TEST_CASE("init_model zero init_scale zeroes the latent table") {
    ModelShape shape;
    shape.latent_dim = 4;
    shape.init_scale = 0.0;
    Rng rng(1);
    auto [nets, lat] = init_model({5}, shape, 6, rng);
    CHECK(max_abs(lat.h) == 0.0);
}

TEST_CASE("init_model rejects bad dimensions") {
    ModelShape shape;
    shape.latent_dim = 0;
    Rng rng(1);
    CHECK_THROWS_AS(init_model({5}, shape, 6, rng), ConfigError);
    shape.latent_dim = 2;
    CHECK_THROWS_AS(init_model({0}, shape, 6, rng), ConfigError);
    CHECK_THROWS_AS(init_model({5}, shape, 0, rng), ConfigError);
}

TEST_CASE("predict_view clamps log sigma and matches per-row evaluation") {
    Rng rng(3);
    ModelShape shape;
    shape.latent_dim = 3;
    shape.hidden1 = 5;
    shape.hidden2 = 6;
    auto [nets, lat] = init_model({4}, shape, 8, rng);

    SUBCASE("zero-weight sigma head gives sigma = 1") {
        RNet net = nets[0];
        net.sigma_head = MlpParams::zeros(3, 5, 6, 1);
        ViewPrediction pred = predict_view(net, lat);
        for (double ls : pred.log_sigma) CHECK(ls == 0.0);
        Matrix sigma = extract_sigma({pred});
        for (std::size_t i = 0; i < sigma.rows(); ++i) CHECK(sigma(i, 0) == 1.0);
    }

    SUBCASE("raw sigma output beyond the clamp is pinned to it") {
        RNet net = nets[0];
        net.sigma_head = MlpParams::zeros(3, 5, 6, 1);
        net.sigma_head.b3(0, 0) = 10.0;
        ViewPrediction pred = predict_view(net, lat);
        for (double ls : pred.log_sigma) CHECK(ls == 6.0);
        net.sigma_head.b3(0, 0) = -10.0;
        pred = predict_view(net, lat);
        for (double ls : pred.log_sigma) CHECK(ls == -6.0);
        Matrix sigma = extract_sigma({pred});
        CHECK(sigma(0, 0) == doctest::Approx(std::exp(-6.0)).epsilon(1e-12));
    }

    SUBCASE("mu rows equal single-row forward passes") {
        ViewPrediction pred = predict_view(nets[0], lat);
        for (std::size_t i = 0; i < lat.sample_count(); ++i) {
            Matrix row(1, lat.dim());
            for (std::size_t j = 0; j < lat.dim(); ++j) row(0, j) = lat.h(i, j);
            Matrix mu_row = mlp_forward(nets[0].mean_head, row);
            for (std::size_t j = 0; j < mu_row.cols(); ++j) {
                CHECK(std::fabs(pred.mu(i, j) - mu_row(0, j)) <= 1e-12);
            }
        }
    }
}

TEST_CASE("dua_loss matches hand-computed scalar cases") {
    MultiViewDataset data;
    data.views.push_back(Matrix{{1.0, 0.0}});
    data.view_names.push_back("v");

    std::vector<ViewPrediction> preds = fixed_preds(data, 0.0);

    SUBCASE("zero residual, sigma 1 gives zero loss") {
        preds[0].mu = data.views[0];
        LossBreakdown l = dua_loss(data, preds);
        CHECK(l.total == 0.0);
    }

    SUBCASE("unit residual, sigma 1") {
        LossBreakdown l = dua_loss(data, preds);
        CHECK(l.total == doctest::Approx(0.5).epsilon(1e-12));
        CHECK(l.per_view_data_term[0] == doctest::Approx(0.5));
        CHECK(l.per_view_reg_term[0] == 0.0);
    }

    SUBCASE("residual 5, sigma 5") {
        data.views[0] = Matrix{{3.0, 4.0}};
        preds[0].log_sigma[0] = std::log(5.0);
        LossBreakdown l = dua_loss(data, preds);
        CHECK(l.total == doctest::Approx(0.5 + std::log(5.0)).epsilon(1e-12));
        CHECK(l.total == doctest::Approx(2.10944).epsilon(1e-5));
    }
}

TEST_CASE("rnets_loss basics and sigma-1 identity") {
    MultiViewDataset data = tiny_dataset(5, 6, {3, 4});
    std::vector<ViewPrediction> preds = fixed_preds(data, 0.0);
    Rng rng(8);
    for (auto& p : preds) p.mu = rng.gaussian(p.mu.rows(), p.mu.cols());

    LossBreakdown r = rnets_loss(data, preds);
    LossBreakdown d = dua_loss(data, preds);
    CHECK(r.total == d.total);  // sigma = 1 everywhere: exact identity
    for (std::size_t v = 0; v < 2; ++v) {
        CHECK(r.per_view_data_term[v] == d.per_view_data_term[v]);
        CHECK(r.per_view_reg_term[v] == 0.0);
        CHECK(d.per_view_reg_term[v] == 0.0);
    }

    preds[0].mu = data.views[0];
    preds[1].mu = data.views[1];
    CHECK(rnets_loss(data, preds).total == 0.0);

    MultiViewDataset single;
    single.views.push_back(Matrix{{1.0, 0.0}});
    single.view_names.push_back("v");
    auto sp = fixed_preds(single, 0.0);
    CHECK(rnets_loss(single, sp).total == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("loss breakdown total equals the sum of its components") {
    MultiViewDataset data = tiny_dataset(17, 12, {5, 3, 7});
    Rng rng(18);
    std::vector<ViewPrediction> preds = fixed_preds(data, 0.0);
    for (auto& p : preds) {
        p.mu = rng.gaussian(p.mu.rows(), p.mu.cols());
        for (auto& ls : p.log_sigma) ls = rng.normal();
    }
    LossBreakdown l = dua_loss(data, preds);
    double sum = 0.0;
    for (std::size_t v = 0; v < 3; ++v) sum += l.per_view_data_term[v] + l.per_view_reg_term[v];
    CHECK(l.total == doctest::Approx(sum).epsilon(1e-9));
}

TEST_CASE("dua_loss is invariant under sample permutation") {
    MultiViewDataset data = tiny_dataset(23, 9, {4, 6});
    Rng rng(24);
    std::vector<ViewPrediction> preds = fixed_preds(data, 0.0);
    for (auto& p : preds) {
        p.mu = rng.gaussian(p.mu.rows(), p.mu.cols());
        for (auto& ls : p.log_sigma) ls = 0.5 * rng.normal();
    }
    const double base = dua_loss(data, preds).total;

    // Reverse the sample order everywhere.
    MultiViewDataset rev = data;
    auto rpreds = preds;
    const std::size_t n = data.sample_count();
    for (std::size_t v = 0; v < data.view_count(); ++v) {
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < data.view_width(v); ++j) {
                rev.views[v](i, j) = data.views[v](n - 1 - i, j);
                rpreds[v].mu(i, j) = preds[v].mu(n - 1 - i, j);
            }
            rpreds[v].log_sigma[i] = preds[v].log_sigma[n - 1 - i];
        }
    }
    CHECK(dua_loss(rev, rpreds).total == doctest::Approx(base).epsilon(1e-12));
}

TEST_CASE("dua_loss lower bound at the per-sample optimal sigma") {
    // With sigma free, the per-(sample, view) term is minimized at
    // sigma = ||residual||, giving 1/2 + ln ||residual||.
    Rng rng(31);
    for (int trial = 0; trial < 10; ++trial) {
        MultiViewDataset data = tiny_dataset(100 + trial, 5, {4});
        std::vector<ViewPrediction> preds = fixed_preds(data, 0.0);
        preds[0].mu = rng.gaussian(5, 4);
        for (auto& ls : preds[0].log_sigma) ls = 2.0 * rng.normal();

        double bound = 0.0;
        bool usable = true;
        for (std::size_t i = 0; i < 5; ++i) {
            double rsq = 0.0;
            for (std::size_t j = 0; j < 4; ++j) {
                const double d = data.views[0](i, j) - preds[0].mu(i, j);
                rsq += d * d;
            }
            const double r = std::sqrt(rsq);
            if (r == 0.0 || std::log(r) < kLogSigmaMin || std::log(r) > kLogSigmaMax) {
                usable = false;
                break;
            }
            bound += 0.5 + std::log(r);
        }
        REQUIRE(usable);
        CHECK(dua_loss(data, preds).total >= bound - 1e-9);
    }
}

TEST_CASE("loss rejects non-finite inputs and misaligned predictions") {
    MultiViewDataset data = tiny_dataset(40, 4, {3});
    auto preds = fixed_preds(data, 0.0);
    MultiViewDataset bad = data;
    bad.views[0](1, 2) = std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS(dua_loss(bad, preds), DataError);

    auto short_preds = preds;
    short_preds[0].log_sigma.pop_back();
    CHECK_THROWS_AS(dua_loss(data, short_preds), ShapeError);
    CHECK_THROWS_AS(dua_loss(data, {}), ShapeError);
}

TEST_CASE("loss_gradients: zero residual with sigma 1 zeroes mean-head output grads") {
    Rng rng(51);
    ModelShape shape;
    shape.latent_dim = 3;
    shape.hidden1 = 4;
    shape.hidden2 = 5;
    auto [nets, lat] = init_model({4}, shape, 6, rng);
    // Sigma head pinned to output exactly 0 (sigma = 1); data equals mu.
    nets[0].sigma_head = MlpParams::zeros(3, 4, 5, 1);
    MultiViewDataset data;
    data.views.push_back(mlp_forward(nets[0].mean_head, lat.h));
    data.view_names.push_back("v0");

    BackwardResult res = loss_gradients(data, nets, lat, Objective::dua);
    CHECK(res.loss.total == 0.0);
    CHECK(max_abs(res.grads.nets[0].mean_head.w3) == 0.0);
    CHECK(max_abs(res.grads.nets[0].mean_head.b3) == 0.0);
}

TEST_CASE("sigma gradient vanishes exactly at sigma = residual norm") {
    // d/d(log sigma) [ rsq/(2 sigma^2) + log sigma ] = -rsq e^{-2 ls} + 1,
    // zero iff sigma = ||r||, negative below, positive above.
    for (double r : {0.5, 1.0, 3.0}) {
        const double ls_star = std::log(r);
        const double rsq = r * r;
        CHECK(std::fabs(-rsq * std::exp(-2.0 * ls_star) + 1.0) <= 1e-12);
        CHECK((-rsq * std::exp(-2.0 * (ls_star - 0.1)) + 1.0) < 0.0);
        CHECK((-rsq * std::exp(-2.0 * (ls_star + 0.1)) + 1.0) > 0.0);
    }
}

TEST_CASE("1-D optimization over log sigma converges to ln(residual norm)") {
    // Freeze mu; only the sigma head's output bias effectively moves (all
    // other sigma-head parameters have zero gradient through the zero net),
    // so the model's log sigma is exactly that bias.
    for (double r : {0.5, 1.0, 3.0}) {
        MultiViewDataset data;
        data.views.push_back(Matrix{{r, 0.0}});
        data.view_names.push_back("v0");

        std::vector<RNet> nets(1);
        nets[0].mean_head = MlpParams::zeros(2, 3, 3, 2);
        nets[0].sigma_head = MlpParams::zeros(2, 3, 3, 1);
        LatentTable lat;
        lat.h = Matrix(1, 2);

        AdamConfig adam;
        adam.lr = 0.05;
        AdamState opt(std::as_const(nets[0].sigma_head).params(), adam);
        for (int iter = 0; iter < 2000; ++iter) {
            BackwardResult res = loss_gradients(data, nets, lat, Objective::dua);
            const NetGradients& g = res.grads.nets[0];
            opt.step(nets[0].sigma_head.params(), g.sigma_head.params());
        }
        const double learned = nets[0].sigma_head.b3(0, 0);
        CHECK(std::fabs(std::exp(learned) - r) / r < 1e-3);
    }
}

TEST_CASE("loss_gradients match central finite differences") {
    Rng rng(61);
    const double step = 1e-5;
    for (int trial = 0; trial < 8; ++trial) {
        const std::size_t n = 4, d = 3;
        MultiViewDataset data = tiny_dataset(500 + trial, n, {4, 2});
        ModelShape shape;
        shape.latent_dim = d;
        shape.hidden1 = 4;
        shape.hidden2 = 5;
        Rng model_rng(700 + trial);
        auto [nets, lat] = init_model({4, 2}, shape, n, model_rng);
        for (auto& net : nets) {
            randomize_biases(net.mean_head, model_rng);
            randomize_biases(net.sigma_head, model_rng);
        }
        const bool dim_scaled = trial % 2 == 1;
        const Objective objective = trial % 3 == 0 ? Objective::rnets : Objective::dua;

        BackwardResult res = loss_gradients(data, nets, lat, objective, dim_scaled);

        auto loss_of = [&]() {
            std::vector<ViewPrediction> preds;
            for (const auto& net : nets) preds.push_back(predict_view(net, lat));
            return objective == Objective::dua ? dua_loss(data, preds, dim_scaled).total
                                               : rnets_loss(data, preds).total;
        };

        double worst = 0.0;
        auto fd_check = [&](Matrix& param, const Matrix& grad) {
            for (std::size_t i = 0; i < param.size(); ++i) {
                const double saved = param.values()[i];
                param.values()[i] = saved + step;
                const double up = loss_of();
                param.values()[i] = saved - step;
                const double down = loss_of();
                param.values()[i] = saved;
                const double fd = (up - down) / (2.0 * step);
                worst = std::max(worst, rel_err(grad.values()[i], fd));
            }
        };

        for (std::size_t v = 0; v < nets.size(); ++v) {
            auto mp = nets[v].mean_head.params();
            auto mg = res.grads.nets[v].mean_head.params();
            for (std::size_t k = 0; k < mp.size(); ++k) fd_check(*mp[k], *mg[k]);
            if (objective == Objective::dua) {
                auto sp = nets[v].sigma_head.params();
                auto sg = res.grads.nets[v].sigma_head.params();
                for (std::size_t k = 0; k < sp.size(); ++k) fd_check(*sp[k], *sg[k]);
            }
        }
        fd_check(lat.h, res.grads.latent);
        CHECK(worst < 1e-4);
    }
}

TEST_CASE("clamped sigma raw outputs receive zero gradient") {
    MultiViewDataset data;
    data.views.push_back(Matrix{{2.0, 1.0}});
    data.view_names.push_back("v0");

    std::vector<RNet> nets(1);
    nets[0].mean_head = MlpParams::zeros(2, 3, 3, 2);
    nets[0].sigma_head = MlpParams::zeros(2, 3, 3, 1);
    nets[0].sigma_head.b3(0, 0) = 9.0;  // raw output far above the clamp
    LatentTable lat;
    lat.h = Matrix(1, 2);

    BackwardResult res = loss_gradients(data, nets, lat, Objective::dua);
    CHECK(res.preds[0].log_sigma[0] == 6.0);
    for (const Matrix* g : res.grads.nets[0].sigma_head.params()) CHECK(max_abs(*g) == 0.0);
}

TEST_CASE("rnets objective never touches sigma heads; freeze_sigma matches its data term") {
    MultiViewDataset data = tiny_dataset(71, 5, {3});
    ModelShape shape;
    shape.latent_dim = 2;
    Rng rng(72);
    auto [nets, lat] = init_model({3}, shape, 5, rng);

    BackwardResult r = loss_gradients(data, nets, lat, Objective::rnets);
    for (const Matrix* g : r.grads.nets[0].sigma_head.params()) CHECK(max_abs(*g) == 0.0);
    CHECK(r.loss.per_view_reg_term[0] == 0.0);

    BackwardResult f = loss_gradients(data, nets, lat, Objective::dua, false, true);
    CHECK(f.loss.total == r.loss.total);
    for (const Matrix* g : f.grads.nets[0].sigma_head.params()) CHECK(max_abs(*g) == 0.0);
    // Frozen-sigma predictions still expose the sigma head's actual output.
    ViewPrediction direct = predict_view(nets[0], lat);
    for (std::size_t i = 0; i < 5; ++i)
        CHECK(f.preds[0].log_sigma[i] == direct.log_sigma[i]);
}

TEST_CASE("extract_sigma is monotone in log sigma and matches layout") {
    ViewPrediction a;
    a.mu = Matrix(3, 2);
    a.log_sigma = {-6.0, 0.0, 1.0};
    ViewPrediction b;
    b.mu = Matrix(3, 2);
    b.log_sigma = {0.5, 2.0, -1.0};
    Matrix sigma = extract_sigma({a, b});
    CHECK(sigma.rows() == 3);
    CHECK(sigma.cols() == 2);
    CHECK(sigma(0, 0) == doctest::Approx(0.00247875).epsilon(1e-5));
    CHECK(sigma(1, 0) == 1.0);
    CHECK(sigma(2, 0) > sigma(1, 0));
    for (std::size_t i = 0; i < 3; ++i) CHECK(sigma(i, 1) == std::exp(b.log_sigma[i]));
}
