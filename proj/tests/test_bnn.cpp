#include <catch2/catch_amalgamated.hpp>
#include <cmath>

#include "uqsurro/bnn.hpp"

using namespace uqsurro;

namespace {

WeightNoise zero_noise(const Bnn& bnn) {
    WeightNoise noise;
    for (const Matrix& mu : bnn.posterior.mu) noise.emplace_back(mu.rows, mu.cols, 0.0);
    return noise;
}

// single-weight posterior helper for the KL hand values
double kl_single(double mu, double sigma_q, double sigma_p) {
    VariationalPosterior post;
    post.mu.emplace_back(1, 1, mu);
    post.rho.emplace_back(1, 1, inv_softplus(sigma_q));
    PriorSpec prior;
    prior.sigma = sigma_p;
    return kl_gaussians(post, prior);
}

Dataset linear_1d_dataset(std::size_t n) {
    Matrix x(n, 1), y(n, 1);
    for (std::size_t i = 0; i < n; ++i) {
        x(i, 0) = -1.0 + 2.0 * static_cast<double>(i) / static_cast<double>(n - 1);
        y(i, 0) = 2.0 * x(i, 0);
    }
    return make_dataset({"x"}, {"y"}, std::move(x), std::move(y));
}

} // namespace

TEST_CASE("zero noise realizes the posterior means", "[bnn]") {
    const Bnn bnn = init_bnn(2, {{4, Activation::relu}, {2, Activation::linear}}, {}, 3);
    const Mlp realized = realize_weights(bnn, zero_noise(bnn));
    for (std::size_t l = 0; l < bnn.depth(); ++l)
        for (std::size_t i = 0; i < realized.weights[l].v.size(); ++i)
            REQUIRE(realized.weights[l].v[i] == bnn.posterior.mu[l].v[i]);
}

TEST_CASE("tiny posterior scale collapses to the mean network", "[bnn]") {
    Bnn bnn = init_bnn(2, {{6, Activation::tanh}, {2, Activation::linear}}, {}, 5);
    for (auto& rho : bnn.posterior.rho)
        for (double& r : rho.v) r = inv_softplus(1e-8);
    RngStream rng(7);
    const Mlp sampled = sample_weights(bnn, rng);
    const std::vector<double> x = {0.4, -0.2};
    const auto ys = forward(sampled, x);
    const auto ym = forward(bnn.mean_network(), x);
    for (std::size_t i = 0; i < ys.size(); ++i) REQUIRE(std::abs(ys[i] - ym[i]) < 1e-6);
}

TEST_CASE("weight samples have the posterior's moments", "[bnn]") {
    Bnn bnn = init_bnn(1, {{1, Activation::linear}}, {}, 1);
    bnn.posterior.mu[0](0, 0) = 0.5;
    bnn.posterior.rho[0](0, 0) = inv_softplus(2.0);
    RngStream rng(11);
    const int n = 100000;
    double acc = 0.0, acc2 = 0.0;
    for (int i = 0; i < n; ++i) {
        const double w = sample_weights(bnn, rng).weights[0](0, 0);
        acc += w;
        acc2 += w * w;
    }
    const double mean = acc / n;
    const double stddev = std::sqrt(acc2 / n - mean * mean);
    REQUIRE(std::abs(mean - 0.5) < 0.02);
    REQUIRE(std::abs(stddev - 2.0) < 0.02);
}

TEST_CASE("closed-form KL hand values", "[bnn]") {
    REQUIRE(kl_single(0.0, 1.0, 1.0) == Catch::Approx(0.0).margin(1e-9));
    REQUIRE(kl_single(1.0, 1.0, 1.0) == Catch::Approx(0.5).margin(1e-9));
    REQUIRE(kl_single(0.0, 2.0, 1.0) ==
            Catch::Approx(0.5 * (4.0 - 1.0 - std::log(4.0))).margin(1e-9));
}

TEST_CASE("closed-form KL matches a Monte Carlo estimate", "[bnn]") {
    RngStream rng(13);
    for (int trial = 0; trial < 5; ++trial) {
        const double mu = rng.uniform(-1.5, 1.5);
        const double sq = rng.uniform(0.3, 2.0);
        const double sp = rng.uniform(0.5, 2.0);
        const double exact = kl_single(mu, sq, sp);

        const int n = 200000;
        double acc = 0.0, acc2 = 0.0;
        for (int i = 0; i < n; ++i) {
            const double w = mu + sq * rng.normal_sample();
            const double logq = -std::log(sq) - (w - mu) * (w - mu) / (2.0 * sq * sq);
            const double logp = -std::log(sp) - w * w / (2.0 * sp * sp);
            const double term = logq - logp;
            acc += term;
            acc2 += term * term;
        }
        const double mc = acc / n;
        const double se = std::sqrt((acc2 / n - mc * mc) / n);
        REQUIRE(std::abs(mc - exact) <= 3.0 * se + 1e-9);
    }
}

TEST_CASE("kl_gaussians requires a gaussian prior", "[bnn]") {
    const Bnn bnn = init_bnn(1, {{2, Activation::relu}, {2, Activation::linear}}, {}, 1);
    PriorSpec mixture;
    mixture.kind = PriorKind::scale_mixture;
    REQUIRE_THROWS_AS(kl_gaussians(bnn.posterior, mixture), ConfigError);
}

TEST_CASE("elbo matches a term-by-term reassembly", "[bnn]") {
    const Bnn bnn = init_bnn(2, {{4, Activation::tanh}, {2, Activation::linear}}, {}, 17);
    RngStream rng(23);
    Matrix x(6, 2), y(6, 1);
    for (double& v : x.v) v = rng.uniform(-1.0, 1.0);
    for (double& v : y.v) v = rng.uniform(-1.0, 1.0);

    RngStream noise_rng(29);
    const std::vector<WeightNoise> noises = {draw_weight_noise(bnn, noise_rng)};
    const std::size_t n_batches = 4;
    const double got = elbo_with_noise(bnn, x, y, n_batches, noises, nullptr);

    // reassemble: KL / n_batches + summed per-row NLL at the realized weights
    const Mlp realized = realize_weights(bnn, noises[0]);
    double nll_sum = 0.0;
    for (std::size_t r = 0; r < x.rows; ++r) {
        const auto heads = read_heads(forward(realized, x.row(r)));
        nll_sum += gaussian_nll(y(r, 0), heads[0]);
    }
    const double expected = kl_gaussians(bnn.posterior, bnn.prior) / n_batches + nll_sum;
    REQUIRE(std::abs(got - expected) <= 1e-10 * std::max(1.0, std::abs(expected)));
}

TEST_CASE("per-batch KL weights sum to the full KL over an epoch", "[bnn]") {
    const Bnn bnn = init_bnn(1, {{3, Activation::tanh}, {2, Activation::linear}}, {}, 19);
    RngStream rng(31);
    const std::size_t n_batches = 7;
    const std::vector<WeightNoise> noises = {zero_noise(bnn)};
    const Mlp mean_net = bnn.mean_network();

    double kl_total = 0.0;
    for (std::size_t b = 0; b < n_batches; ++b) {
        Matrix x(2, 1), y(2, 1);
        for (double& v : x.v) v = rng.uniform(-1.0, 1.0);
        for (double& v : y.v) v = rng.uniform(-1.0, 1.0);
        const double elbo = elbo_with_noise(bnn, x, y, n_batches, noises, nullptr);
        double nll_sum = 0.0;
        for (std::size_t r = 0; r < x.rows; ++r)
            nll_sum += gaussian_nll(y(r, 0), read_heads(forward(mean_net, x.row(r)))[0]);
        kl_total += elbo - nll_sum;
    }
    const double kl = kl_gaussians(bnn.posterior, bnn.prior);
    REQUIRE(std::abs(kl_total - kl) <= 1e-12 * std::max(1.0, kl));
}

namespace {

// finite differences over mu, rho and biases with frozen noise
void check_bnn_gradients(Bnn& bnn, const Matrix& x, const Matrix& y,
                         const std::vector<WeightNoise>& noises) {
    BnnGradients grads;
    const std::size_t n_batches = 3;
    elbo_with_noise(bnn, x, y, n_batches, noises, &grads);
    const double h = 1e-5;
    auto check_entry = [&](double& param, double analytic) {
        const double saved = param;
        param = saved + h;
        const double up = elbo_with_noise(bnn, x, y, n_batches, noises, nullptr);
        param = saved - h;
        const double down = elbo_with_noise(bnn, x, y, n_batches, noises, nullptr);
        param = saved;
        const double fd = (up - down) / (2.0 * h);
        const double err = std::abs(analytic - fd) /
                           std::max({std::abs(analytic), std::abs(fd), 1e-4});
        REQUIRE(err <= 1e-5);
    };
    for (std::size_t l = 0; l < bnn.depth(); ++l) {
        for (std::size_t i = 0; i < bnn.posterior.mu[l].v.size(); ++i)
            check_entry(bnn.posterior.mu[l].v[i], grads.dmu[l].v[i]);
        for (std::size_t i = 0; i < bnn.posterior.rho[l].v.size(); ++i)
            check_entry(bnn.posterior.rho[l].v[i], grads.drho[l].v[i]);
        for (std::size_t j = 0; j < bnn.biases[l].size(); ++j)
            check_entry(bnn.biases[l][j], grads.dbias[l][j]);
    }
}

} // namespace

TEST_CASE("reparameterization gradients match finite differences", "[bnn][grad]") {
    Bnn bnn = init_bnn(2, {{5, Activation::tanh}, {2, Activation::linear}}, {}, 37);
    RngStream rng(41);
    Matrix x(4, 2), y(4, 1);
    for (double& v : x.v) v = rng.uniform(-1.0, 1.0);
    for (double& v : y.v) v = rng.uniform(-1.0, 1.0);
    std::vector<WeightNoise> noises = {draw_weight_noise(bnn, rng),
                                       draw_weight_noise(bnn, rng)};
    check_bnn_gradients(bnn, x, y, noises);
}

TEST_CASE("scale-mixture prior gradients match finite differences", "[bnn][grad]") {
    PriorSpec prior;
    prior.kind = PriorKind::scale_mixture;
    prior.pi = 0.4;
    prior.sigma1 = 1.2;
    prior.sigma2 = 0.2;
    Bnn bnn = init_bnn(2, {{4, Activation::sigmoid}, {2, Activation::linear}}, prior, 43);
    RngStream rng(47);
    Matrix x(3, 2), y(3, 1);
    for (double& v : x.v) v = rng.uniform(-1.0, 1.0);
    for (double& v : y.v) v = rng.uniform(-1.0, 1.0);
    std::vector<WeightNoise> noises = {draw_weight_noise(bnn, rng)};
    check_bnn_gradients(bnn, x, y, noises);
}

TEST_CASE("zero learning rate leaves the posterior unchanged", "[bnn]") {
    Dataset data = linear_1d_dataset(10);
    TrainConfig cfg;
    cfg.learning_rate = 0.0;
    cfg.epochs = 2;
    cfg.batch_size = 5;
    RngStream rng(53);
    const Bnn before = init_bnn(1, {{3, Activation::tanh}, {2, Activation::linear}}, {},
                                RngStream(53).fork("bnn-init").next_u64());
    const BnnTrainResult result =
        train_bnn(data, {{3, Activation::tanh}, {2, Activation::linear}}, cfg, {}, rng);
    for (std::size_t l = 0; l < before.depth(); ++l)
        for (std::size_t i = 0; i < before.posterior.mu[l].v.size(); ++i) {
            REQUIRE(result.model.posterior.mu[l].v[i] == before.posterior.mu[l].v[i]);
            REQUIRE(result.model.posterior.rho[l].v[i] == before.posterior.rho[l].v[i]);
        }
}

TEST_CASE("ELBO decreases on the linear task", "[bnn][slow]") {
    Dataset data = linear_1d_dataset(24);
    TrainConfig cfg;
    cfg.learning_rate = 5e-3;
    cfg.epochs = 400;
    cfg.batch_size = 8;
    RngStream rng(59);
    const BnnTrainResult result =
        train_bnn(data, {{8, Activation::tanh}, {2, Activation::linear}}, cfg, {}, rng);
    const auto& loss = result.log.train_loss;
    const std::size_t quartile = loss.size() / 4;
    double first = 0.0, last = 0.0;
    for (std::size_t i = 0; i < quartile; ++i) {
        first += loss[i];
        last += loss[loss.size() - 1 - i];
    }
    REQUIRE(last < first);
    for (double v : loss) REQUIRE(std::isfinite(v));
}

TEST_CASE("posterior predictive collapses when sigma is tiny", "[bnn]") {
    Bnn bnn = init_bnn(2, {{5, Activation::tanh}, {2, Activation::linear}}, {}, 61);
    for (auto& rho : bnn.posterior.rho)
        for (double& r : rho.v) r = inv_softplus(1e-8);
    const std::vector<double> x = {0.3, 0.7};
    const auto head = read_heads(forward(bnn.mean_network(), x))[0];
    const RngStream rng(67);
    const PredictiveDistribution dist = bnn_predict(bnn, x, 50, rng);
    REQUIRE(std::abs(dist.mean[0] - head.mean) < 1e-6);
    REQUIRE(std::abs(dist.variance[0] - head.variance()) < 1e-6);
}

TEST_CASE("bnn_predict moments match recomputation from raw draws", "[bnn]") {
    const Bnn bnn = init_bnn(2, {{6, Activation::tanh}, {2, Activation::linear}}, {}, 71);
    const RngStream rng(73);
    const PredictiveDistribution dist = bnn_predict(bnn, {0.2, -0.5}, 200, rng);
    REQUIRE(dist.raw_samples.rows == 200);

    std::vector<std::vector<MeanVar>> draws;
    for (std::size_t i = 0; i < 200; ++i)
        draws.push_back({{dist.raw_samples(i, 0), dist.raw_samples(i, 1)}});
    std::vector<double> mean, var;
    mixture_moments(draws, mean, var);
    REQUIRE(std::abs(dist.mean[0] - mean[0]) <= 1e-12 * std::max(1.0, std::abs(mean[0])));
    REQUIRE(std::abs(dist.variance[0] - var[0]) <= 1e-12 * std::max(1.0, var[0]));

    REQUIRE_THROWS_AS(bnn_predict(bnn, {0.2, -0.5}, 1, rng), ConfigError);
}
