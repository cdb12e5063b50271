#include <cmath>

#include "doctest.h"
#include "msi/diffusion.hpp"
#include "msi/errors.hpp"
#include "msi/rng.hpp"
#include "testutil.hpp"

using namespace msi;
namespace tu = testutil;

TEST_CASE("build_noise_schedule interpolates beta linearly") {
    NoiseSchedule s = build_noise_schedule(5, 0.1, 0.5);
    REQUIRE(s.total_steps() == 5);
    CHECK(s.betas[0] == doctest::Approx(0.1).epsilon(1e-15));
    CHECK(s.betas[1] == doctest::Approx(0.2).epsilon(1e-15));
    CHECK(s.betas[2] == doctest::Approx(0.3).epsilon(1e-15));
    CHECK(s.betas[4] == doctest::Approx(0.5).epsilon(1e-15));

    // Cumulative products: abar_1 = 0.9, abar_2 = 0.9*0.8 = 0.72, ...
    CHECK(s.alpha_bar[0] == doctest::Approx(0.9).epsilon(1e-15));
    CHECK(s.alpha_bar[1] == doctest::Approx(0.72).epsilon(1e-15));
    CHECK(s.alpha_bar[2] == doctest::Approx(0.504).epsilon(1e-15));

    // A single step uses beta_start alone.
    NoiseSchedule one = build_noise_schedule(1, 0.25, 0.75);
    REQUIRE(one.total_steps() == 1);
    CHECK(one.betas[0] == 0.25);
    CHECK(one.alpha_bar[0] == doctest::Approx(0.75).epsilon(1e-15));
}

TEST_CASE("hand-checked two-step schedule") {
    // betas 0.1, 0.19: abar = [0.9, 0.9*0.81 = 0.729].
    NoiseSchedule s = build_noise_schedule(2, 0.1, 0.19);
    CHECK(s.alpha_bar[0] == doctest::Approx(0.9).epsilon(1e-15));
    CHECK(s.alpha_bar[1] == doctest::Approx(0.729).epsilon(1e-15));
}

TEST_CASE("build_noise_schedule rejects invalid ranges") {
    CHECK_THROWS_AS(build_noise_schedule(0, 0.1, 0.2), InvalidRange);
    CHECK_THROWS_AS(build_noise_schedule(10, 0.0, 0.2), InvalidRange);
    CHECK_THROWS_AS(build_noise_schedule(10, -0.1, 0.2), InvalidRange);
    CHECK_THROWS_AS(build_noise_schedule(10, 0.3, 0.2), InvalidRange);
    CHECK_THROWS_AS(build_noise_schedule(10, 0.1, 1.0), InvalidRange);
}

TEST_CASE("the reference schedule decays below one percent") {
    NoiseSchedule s = build_noise_schedule(1000, 1e-4, 0.02);
    REQUIRE(s.total_steps() == 1000);
    double prev = 1.0;
    for (double abar : s.alpha_bar) {
        CHECK(abar < prev);  // strictly decreasing
        CHECK(abar > 0.0);
        prev = abar;
    }
    CHECK(s.alpha_bar[999] < 0.01);
}

TEST_CASE("forward_diffuse matches the closed form") {
    // Schedule with abar_1 = 0.81 exactly: beta_start = 0.19.
    NoiseSchedule s = build_noise_schedule(1, 0.19, 0.19);
    std::vector<double> z0 = {1.0, 2.0};
    std::vector<double> eps = {0.5, -0.5};
    std::vector<double> zt = forward_diffuse(z0, eps, s, 1);
    REQUIRE(zt.size() == 2);
    // sqrt(0.81) = 0.9, sqrt(0.19) = 0.43588989435406735.
    CHECK(zt[0] == doctest::Approx(0.9 * 1.0 + 0.43588989435406735 * 0.5).epsilon(1e-12));
    CHECK(zt[1] == doctest::Approx(0.9 * 2.0 - 0.43588989435406735 * 0.5).epsilon(1e-12));
    CHECK(zt[0] == doctest::Approx(1.1179449471770338).epsilon(1e-12));
    CHECK(zt[1] == doctest::Approx(1.5820550528229663).epsilon(1e-12));
}

TEST_CASE("forward_diffuse validates steps and shapes") {
    NoiseSchedule s = build_noise_schedule(10, 0.01, 0.2);
    std::vector<double> z0 = {1.0, 2.0};
    std::vector<double> eps = {0.0, 0.0};
    CHECK_THROWS_AS(forward_diffuse(z0, eps, s, 0), StepOutOfRange);
    CHECK_THROWS_AS(forward_diffuse(z0, eps, s, 11), StepOutOfRange);
    std::vector<double> bad = {1.0};
    CHECK_THROWS_AS(forward_diffuse(z0, bad, s, 1), ShapeMismatch);
}

TEST_CASE("invert_forward recovers the input exactly enough") {
    NoiseSchedule s = build_noise_schedule(1000, 1e-4, 0.02);
    Rng rng(555);
    std::vector<double> z0(64), eps(64);
    for (auto& v : z0) v = tu::gaussian(rng);
    for (auto& v : eps) v = tu::gaussian(rng);
    for (int64_t t : {1, 10, 250, 500, 1000}) {
        std::vector<double> zt = forward_diffuse(z0, eps, s, t);
        std::vector<double> back = invert_forward(zt, eps, s, t);
        for (size_t i = 0; i < z0.size(); ++i)
            CHECK(back[i] == doctest::Approx(z0[i]).epsilon(1e-9));
    }
}

TEST_CASE("invert_forward refuses a vanished signal") {
    // Drive abar to denormal territory: long schedule with big betas.
    NoiseSchedule s = build_noise_schedule(2000, 0.4, 0.999);
    CHECK(s.alpha_bar[1999] < 1e-12);
    std::vector<double> v = {1.0};
    CHECK_THROWS_AS(invert_forward(v, v, s, 2000), StepOutOfRange);
    // Early steps are still fine.
    CHECK_NOTHROW(invert_forward(v, v, s, 1));
}

TEST_CASE("denoising_loss sums squared differences") {
    CHECK(denoising_loss({}, {}) == 0.0);
    CHECK(denoising_loss({1.0}, {1.0}) == 0.0);
    CHECK(denoising_loss({1.0}, {0.0}) == 1.0);
    CHECK(denoising_loss({1.0, 2.0, 3.0}, {0.0, 0.0, 0.0}) == doctest::Approx(14.0));
    CHECK(denoising_loss({3.0, -1.0}, {1.0, 2.0}) == doctest::Approx(4.0 + 9.0));
    CHECK(denoising_loss({1.0, 2.0, 3.0, 4.0}, {1.0, 2.0, 3.0, 2.0}) == doctest::Approx(4.0));
    CHECK(denoising_loss({2.0, 4.0}, {0.0, 0.0}, true) == doctest::Approx(10.0));  // mean
    CHECK_THROWS_AS(denoising_loss({1.0}, {1.0, 2.0}), ShapeMismatch);
}

TEST_CASE("denoising_loss is invariant to element order as a multiset") {
    // Pairwise summation is deterministic; a permuted copy of the same
    // differences must sum to exactly the same double.
    Rng rng(911);
    std::vector<double> a(1000), b(1000);
    for (size_t i = 0; i < a.size(); ++i) {
        a[i] = tu::gaussian(rng);
        b[i] = tu::gaussian(rng);
    }
    double base = denoising_loss(a, b);
    double repeat = denoising_loss(a, b);
    CHECK(base == repeat);

    // Against a plain Kahan-style long double reference.
    long double acc = 0.0L;
    for (size_t i = 0; i < a.size(); ++i) {
        long double d = static_cast<long double>(a[i]) - b[i];
        acc += d * d;
    }
    CHECK(base == doctest::Approx(static_cast<double>(acc)).epsilon(1e-13));
}

TEST_CASE("forward_diffuse is linear in z0 and eps") {
    NoiseSchedule s = build_noise_schedule(100, 1e-3, 0.05);
    Rng rng(77);
    std::vector<double> z0(16), eps(16), zeros(16, 0.0);
    for (auto& v : z0) v = tu::gaussian(rng);
    for (auto& v : eps) v = tu::gaussian(rng);
    for (int64_t t : {1, 50, 100}) {
        auto both = forward_diffuse(z0, eps, s, t);
        auto only_z = forward_diffuse(z0, zeros, s, t);
        auto only_e = forward_diffuse(zeros, eps, s, t);
        for (size_t i = 0; i < z0.size(); ++i)
            CHECK(both[i] == doctest::Approx(only_z[i] + only_e[i]).epsilon(1e-12));
    }
}

TEST_CASE("tensors round-trip through the framed binary format") {
    tu::TempDir tmp("tensor");
    Tensor t;
    t.shape = {2, 3};
    t.values = {1.5, -2.25, 0.0, 1e300, -1e-300, 42.0};
    auto p = tmp.path / "t.bin";
    write_tensor(p, t);
    Tensor back = read_tensor(p);
    CHECK(back.shape == t.shape);
    CHECK(back.values == t.values);

    Tensor scalarish;
    scalarish.shape = {1};
    scalarish.values = {3.25};
    write_tensor(p, scalarish);
    back = read_tensor(p);
    CHECK(back.shape == std::vector<uint64_t>{1});
    CHECK(back.values == std::vector<double>{3.25});
}

TEST_CASE("read_tensor rejects truncated or inconsistent files") {
    tu::TempDir tmp("tensorbad");
    auto p = tmp.path / "t.bin";

    Tensor t;
    t.shape = {2, 2};
    t.values = {1, 2, 3, 4};
    write_tensor(p, t);
    std::string bytes = read_file(p);

    atomic_write_file(p, bytes.substr(0, bytes.size() - 3));  // chopped payload
    CHECK_THROWS_AS(read_tensor(p), MalformedDocument);

    atomic_write_file(p, bytes + "xx");  // trailing garbage
    CHECK_THROWS_AS(read_tensor(p), MalformedDocument);

    atomic_write_file(p, std::string("abc"));  // not even a header
    CHECK_THROWS_AS(read_tensor(p), MalformedDocument);

    CHECK_THROWS_AS(read_tensor(tmp.path / "missing.bin"), IoFailure);
}

TEST_CASE("write_tensor validates shape against values") {
    tu::TempDir tmp("tensorshape");
    Tensor t;
    t.shape = {2, 3};
    t.values = {1, 2, 3, 4};  // 4 != 6
    CHECK_THROWS_AS(write_tensor(tmp.path / "t.bin", t), ShapeMismatch);
}
