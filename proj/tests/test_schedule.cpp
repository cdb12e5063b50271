#include <string>

#include "doctest.h"
#include "msi/errors.hpp"
#include "msi/schedule.hpp"

using namespace msi;

TEST_CASE("validate enforces stage and curriculum bounds") {
    CHECK_NOTHROW(validate(DstConfig{}));
    CHECK_NOTHROW(validate(ClsqConfig{}));

    DstConfig d;
    d.e1 = 0;
    CHECK_THROWS_AS(validate(d), InvalidRange);
    d = DstConfig{};
    d.e2 = -1;
    CHECK_THROWS_AS(validate(d), InvalidRange);
    d = DstConfig{};
    d.e1 = 3;
    d.e2 = 3;  // stage one must be strictly longer
    CHECK_THROWS_AS(validate(d), InvalidRange);
    d = DstConfig{};
    d.eta2 = d.eta1;  // stage two must decay
    CHECK_THROWS_AS(validate(d), InvalidRange);
    d = DstConfig{};
    d.eta2 = 0.0;
    CHECK_THROWS_AS(validate(d), InvalidRange);

    ClsqConfig c;
    c.k_min = 0;
    CHECK_THROWS_AS(validate(c), InvalidRange);
    c = ClsqConfig{};
    c.k_max = 1;  // below k_min
    CHECK_THROWS_AS(validate(c), InvalidRange);
    c = ClsqConfig{};
    c.total_epochs = 0;
    CHECK_THROWS_AS(validate(c), InvalidRange);
    c = ClsqConfig{};
    c.gamma = 0.0;
    CHECK_THROWS_AS(validate(c), InvalidRange);
}

TEST_CASE("subjects_at_epoch reproduces the reference curriculum") {
    // k_min=2, k_max=5, E=10, gamma=1: 2,2,2,3,3,3,4,4,4,5.
    ClsqConfig c;
    const int64_t expect[] = {2, 2, 2, 3, 3, 3, 4, 4, 4, 5};
    for (int64_t e = 1; e <= 10; ++e) CHECK(subjects_at_epoch(c, e) == expect[e - 1]);

    CHECK_THROWS_AS(subjects_at_epoch(c, 0), EpochOutOfRange);
    CHECK_THROWS_AS(subjects_at_epoch(c, 11), EpochOutOfRange);
}

TEST_CASE("subjects_at_epoch starts at k_min and ends at k_max") {
    for (double gamma : {0.25, 0.5, 1.0, 2.0, 5.0}) {
        for (int64_t kmin : {1, 2, 4}) {
            for (int64_t kmax : {4, 5, 9}) {
                ClsqConfig c;
                c.k_min = kmin;
                c.k_max = kmax;
                c.total_epochs = 17;
                c.gamma = gamma;
                CHECK(subjects_at_epoch(c, c.total_epochs) == kmax);
                CHECK(subjects_at_epoch(c, 1) >= kmin);
                int64_t prev = 0;
                for (int64_t e = 1; e <= c.total_epochs; ++e) {
                    int64_t k = subjects_at_epoch(c, e);
                    CHECK(k >= kmin);
                    CHECK(k <= kmax);
                    CHECK(k >= prev);  // never shrinks
                    prev = k;
                }
            }
        }
    }
}

TEST_CASE("larger gamma holds the curriculum lower for longer") {
    ClsqConfig slow;
    slow.gamma = 3.0;
    ClsqConfig fast;
    fast.gamma = 0.3;
    for (int64_t e = 1; e <= 10; ++e)
        CHECK(subjects_at_epoch(slow, e) <= subjects_at_epoch(fast, e));
}

TEST_CASE("learning_rate_at steps at the stage boundary") {
    DstConfig d;  // eta1=1e-4, eta2=5e-5, e1=7, e2=3
    CHECK(learning_rate_at(d, 1) == 1e-4);
    CHECK(learning_rate_at(d, 7) == 1e-4);
    CHECK(learning_rate_at(d, 8) == 5e-5);
    CHECK(learning_rate_at(d, 10) == 5e-5);
    CHECK_THROWS_AS(learning_rate_at(d, 0), EpochOutOfRange);
    CHECK_THROWS_AS(learning_rate_at(d, 11), EpochOutOfRange);
}

TEST_CASE("export_schedule pairs both schedules per epoch") {
    DstConfig d;
    ClsqConfig c;
    std::vector<EpochPlan> plan = export_schedule(d, c);
    REQUIRE(plan.size() == 10);
    const int64_t expect_k[] = {2, 2, 2, 3, 3, 3, 4, 4, 4, 5};
    for (size_t i = 0; i < plan.size(); ++i) {
        CHECK(plan[i].epoch == static_cast<int64_t>(i + 1));
        CHECK(plan[i].learning_rate == (plan[i].epoch <= 7 ? 1e-4 : 5e-5));
        CHECK(plan[i].k == expect_k[i]);
    }
}

TEST_CASE("export_schedule rejects disagreeing epoch counts") {
    DstConfig d;
    ClsqConfig c;
    c.total_epochs = 12;  // dst covers 10
    CHECK_THROWS_AS(export_schedule(d, c), ConfigMismatch);
}

TEST_CASE("select_subjects passes small casts through untouched") {
    Rng rng(5);
    std::vector<std::string> subjects = {"a", "b", "c"};
    CHECK(select_subjects(subjects, 3, rng) == subjects);
    CHECK(select_subjects(subjects, 7, rng) == subjects);
    CHECK_THROWS_AS(select_subjects(subjects, 0, rng), InternalError);
}

TEST_CASE("select_subjects keeps relative order and original elements") {
    Rng rng(17);
    std::vector<int> subjects = {10, 20, 30, 40, 50, 60};
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<int> picked = select_subjects(subjects, 3, rng);
        REQUIRE(picked.size() == 3);
        CHECK(picked[0] < picked[1]);
        CHECK(picked[1] < picked[2]);  // order preserved implies ascending here
        for (int v : picked) CHECK(v % 10 == 0);
    }
}

TEST_CASE("select_subjects replays identically for one seed") {
    std::vector<int> subjects = {1, 2, 3, 4, 5, 6, 7, 8};
    Rng a(31), b(31), c(32);
    bool diverged = false;
    for (int trial = 0; trial < 50; ++trial) {
        auto pa = select_subjects(subjects, 4, a);
        CHECK(pa == select_subjects(subjects, 4, b));
        if (pa != select_subjects(subjects, 4, c)) diverged = true;
    }
    CHECK(diverged);
}
