#include <doctest.h>

#include <cmath>
#include <random>

#include "permstab/dpo.hpp"
#include "permstab/error.hpp"

using namespace permstab;

namespace {

// ln(1 + e^{-0.8}) and ln 2 to 40 digits.
constexpr double kLoss08 = 0.371100665947777712238240143975304386001;
constexpr double kLn2 = 0.6931471805599453094172321214581765680755;

}  // namespace

TEST_CASE("dpo_loss closed-form values") {
  const std::vector<DpoExample> equal{{-3.0, -5.0, -3.0, -5.0}};
  const auto r0 = dpo_loss(equal);
  CHECK(std::abs(r0.loss - kLn2) <= 1e-12);
  CHECK(r0.margins[0] == 0.0);

  const std::vector<DpoExample> shifted{{-1.0, -4.0, -2.0, -3.0}};  // r_w = 1, r_l = -1
  const auto r1 = dpo_loss(shifted, 0.4);
  CHECK(r1.margins[0] == doctest::Approx(0.8));
  CHECK(std::abs(r1.loss - kLoss08) <= 1e-12);

  const std::vector<DpoExample> far{{0.0, -100.0, 0.0, 0.0}};
  CHECK(dpo_loss(far, 0.4).loss <= 1e-15);
  const std::vector<DpoExample> reversed{{-1000.0, 0.0, 0.0, 0.0}};
  CHECK(dpo_loss(reversed, 1.0).loss == doctest::Approx(1000.0));
}

TEST_CASE("dpo_loss default beta is 0.4") {
  const std::vector<DpoExample> b{{-1.0, -4.0, -2.0, -3.0}};
  CHECK(dpo_loss(b).margins[0] == dpo_loss(b, 0.4).margins[0]);
  CHECK(kDefaultBeta == 0.4);
}

TEST_CASE("dpo_loss errors") {
  try {
    dpo_loss(std::vector<DpoExample>{});
    FAIL("expected EmptyBatch");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::EmptyBatch);
  }
  try {
    dpo_loss(std::vector<DpoExample>{{}}, 0.0);
    FAIL("expected NonPositiveBeta");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NonPositiveBeta);
  }
}

TEST_CASE("analytic gradients match central differences") {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> u(-8.0, 0.0);
  for (double beta : {0.1, 0.4, 1.0}) {
    std::vector<DpoExample> batch(50);
    for (auto& e : batch) e = {u(rng), u(rng), u(rng), u(rng)};
    const auto report = dpo_loss(batch, beta);
    const double h = 1e-5;
    for (std::size_t i = 0; i < batch.size(); ++i) {
      // Differencing each example alone keeps round-off from the other
      // terms of the mean out of the quotient.
      const std::vector<DpoExample> one{batch[i]};
      const auto single = dpo_loss(one, beta);
      CHECK(report.gradients[i].policy_w * 50.0 == doctest::Approx(single.gradients[0].policy_w).epsilon(1e-12));
      CHECK(report.gradients[i].policy_l * 50.0 == doctest::Approx(single.gradients[0].policy_l).epsilon(1e-12));
      for (int which = 0; which < 2; ++which) {
        auto plus = one;
        auto minus = one;
        double& p = which == 0 ? plus[0].logp_policy_w : plus[0].logp_policy_l;
        double& m = which == 0 ? minus[0].logp_policy_w : minus[0].logp_policy_l;
        p += h;
        m -= h;
        const double fd = (dpo_loss(plus, beta).loss - dpo_loss(minus, beta).loss) / (2 * h);
        const double an = which == 0 ? single.gradients[0].policy_w : single.gradients[0].policy_l;
        CHECK(std::abs(fd - an) <= 1e-6 * std::abs(an));
      }
    }
  }
}

TEST_CASE("shifting both reference log-probs changes nothing") {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-6.0, 0.0);
  for (int i = 0; i < 50; ++i) {
    const DpoExample e{u(rng), u(rng), u(rng), u(rng)};
    const double c = u(rng);
    const DpoExample s{e.logp_policy_w, e.logp_policy_l, e.logp_ref_w + c, e.logp_ref_l + c};
    const auto a = dpo_loss(std::vector<DpoExample>{e});
    const auto b = dpo_loss(std::vector<DpoExample>{s});
    CHECK(std::abs(a.loss - b.loss) <= 1e-12);
    CHECK(std::abs(a.margins[0] - b.margins[0]) <= 1e-12);
    CHECK(std::abs(a.gradients[0].policy_w - b.gradients[0].policy_w) <= 1e-12);
  }
}

TEST_CASE("raising the preferred log-prob lowers the loss") {
  DpoExample e{-5.0, -3.0, -4.0, -4.0};
  double prev = dpo_loss(std::vector<DpoExample>{e}).loss;
  for (int i = 0; i < 20; ++i) {
    e.logp_policy_w += 0.5;
    const double next = dpo_loss(std::vector<DpoExample>{e}).loss;
    CHECK(next < prev);
    prev = next;
  }
}

TEST_CASE("sequence_logprob") {
  CHECK(sequence_logprob(std::vector<double>{-1.0, -2.0}) == -3.0);
  CHECK(sequence_logprob(std::vector<double>{}) == 0.0);
  CHECK(sequence_logprob(std::vector<double>{-0.5}) == -0.5);
}

TEST_CASE("softplus is stable at the extremes") {
  CHECK(softplus(800.0) == 800.0);
  CHECK(softplus(-800.0) == 0.0);
  CHECK(softplus(0.0) == doctest::Approx(kLn2));
}
