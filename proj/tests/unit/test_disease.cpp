#include "cohortsim/disease.hpp"
#include "cohortsim/error.hpp"

#include <doctest.h>

#include <cmath>
#include <set>

using namespace cohortsim;

namespace {

// |observed - p| within k binomial standard errors.
bool within_binomial(int hits, int n, double p, double k = 4.5)
{
    const double se = std::sqrt(p * (1.0 - p) / n);
    return std::abs(static_cast<double>(hits) / n - p) <= k * se;
}

AgentHealth at_state(DiseaseState s, int next_step)
{
    AgentHealth h;
    h.state = s;
    h.next_step = next_step;
    return h;
}

} // namespace

TEST_SUITE("disease")
{
    TEST_CASE("age bands are ten years wide with an open top band")
    {
        CHECK(ProgressionParams::band(0) == 0);
        CHECK(ProgressionParams::band(9) == 0);
        CHECK(ProgressionParams::band(10) == 1);
        CHECK(ProgressionParams::band(79) == 7);
        CHECK(ProgressionParams::band(80) == 8);
        CHECK(ProgressionParams::band(104) == 8);
    }

    TEST_CASE("infectiousness has gamma(0.25, 4) moments")
    {
        const auto params = ProgressionParams::defaults();
        Rng rng(2024);
        const int n = 200000;
        double sum = 0.0, sum2 = 0.0;
        int severe = 0;
        for (int i = 0; i < n; ++i) {
            AgentHealth h;
            expose(h, params, rng, 0);
            sum += h.infectiousness;
            sum2 += static_cast<double>(h.infectiousness) * h.infectiousness;
            severe += h.severe ? 1 : 0;
            CHECK(h.state == DiseaseState::exposed);
            CHECK(h.next_step >= 1);
        }
        const double mean = sum / n;
        const double var = sum2 / n - mean * mean;
        // mean shape*scale = 1, variance shape*scale^2 = 4
        CHECK(mean == doctest::Approx(1.0).epsilon(5.0 * 2.0 / std::sqrt(n)));
        CHECK(var == doctest::Approx(4.0).epsilon(0.1));
        CHECK(within_binomial(severe, n, 0.5));
    }

    TEST_CASE("duration in steps has the discretised exponential mean")
    {
        Rng rng(9);
        const int n = 100000;
        for (const double mean_days : {1.0, 3.5, 8.0}) {
            double sum = 0.0;
            for (int i = 0; i < n; ++i) sum += sample_duration_steps(mean_days, rng);
            // ceil of an exponential with rate r is geometric with mean 1 / (1 - e^-r)
            const double rate = 1.0 / (mean_days * kStepsPerDay);
            const double want = 1.0 / (1.0 - std::exp(-rate));
            CHECK(sum / n == doctest::Approx(want).epsilon(0.02));
        }
    }

    TEST_CASE("no transition before the scheduled step")
    {
        const auto params = ProgressionParams::defaults();
        Rng rng(1);
        const auto h = at_state(DiseaseState::exposed, 10);
        CHECK(advance_health(h, 30, params, rng, 9).state == DiseaseState::exposed);
        CHECK(advance_health(h, 30, params, rng, 10).state == DiseaseState::presymptomatic);
    }

    TEST_CASE("susceptible and absorbing states never move")
    {
        const auto params = ProgressionParams::defaults();
        Rng rng(1);
        for (const auto s : {DiseaseState::susceptible, DiseaseState::recovered, DiseaseState::deceased}) {
            const auto h = at_state(s, 0);
            CHECK(advance_health(h, 50, params, rng, 1000).state == s);
        }
    }

    TEST_CASE("branching probabilities match their parameters")
    {
        const auto params = ProgressionParams::defaults();
        Rng rng(77);
        const int n = 40000;
        int asym = 0, hosp = 0, crit = 0, dead = 0;
        for (int i = 0; i < n; ++i) {
            asym += advance_health(at_state(DiseaseState::presymptomatic, 0), 40, params, rng, 0).state ==
                            DiseaseState::asymptomatic
                        ? 1
                        : 0;
            hosp += advance_health(at_state(DiseaseState::symptomatic, 0), 75, params, rng, 0).state ==
                            DiseaseState::hospitalised
                        ? 1
                        : 0;
            crit += advance_health(at_state(DiseaseState::hospitalised, 0), 85, params, rng, 0).state ==
                            DiseaseState::critical
                        ? 1
                        : 0;
            dead += advance_health(at_state(DiseaseState::critical, 0), 25, params, rng, 0).state ==
                            DiseaseState::deceased
                        ? 1
                        : 0;
        }
        CHECK(within_binomial(asym, n, params.asymptomatic_fraction));
        CHECK(within_binomial(hosp, n, params.p_hospitalise[7]));
        CHECK(within_binomial(crit, n, params.p_critical[8]));
        CHECK(within_binomial(dead, n, params.p_death[2]));
    }

    TEST_CASE("trajectories follow the allowed transitions and end absorbed")
    {
        const auto params = ProgressionParams::defaults();
        const std::set<std::pair<DiseaseState, DiseaseState>> allowed{
            {DiseaseState::exposed, DiseaseState::presymptomatic},
            {DiseaseState::presymptomatic, DiseaseState::asymptomatic},
            {DiseaseState::presymptomatic, DiseaseState::symptomatic},
            {DiseaseState::asymptomatic, DiseaseState::recovered},
            {DiseaseState::symptomatic, DiseaseState::recovered},
            {DiseaseState::symptomatic, DiseaseState::hospitalised},
            {DiseaseState::hospitalised, DiseaseState::recovered},
            {DiseaseState::hospitalised, DiseaseState::critical},
            {DiseaseState::critical, DiseaseState::recovered},
            {DiseaseState::critical, DiseaseState::deceased},
        };
        Rng rng(5);
        for (int agent = 0; agent < 2000; ++agent) {
            AgentHealth h;
            expose(h, params, rng, 0);
            const int age = agent % 95;
            for (int step = 1; step < 2000 && !is_absorbing(h.state); ++step) {
                const auto next = advance_health(h, age, params, rng, step);
                if (next.state != h.state) {
                    CHECK(allowed.count({h.state, next.state}) == 1);
                    CHECK(next.entered_step == step);
                }
                h = next;
            }
            CHECK(is_absorbing(h.state));
        }
    }

    TEST_CASE("only the three circulating states shed")
    {
        int infective = 0;
        for (std::size_t s = 0; s < kDiseaseStateCount; ++s) infective += is_infective(static_cast<DiseaseState>(s)) ? 1 : 0;
        CHECK(infective == 3);
        CHECK(is_infective(DiseaseState::presymptomatic));
        CHECK_FALSE(is_infective(DiseaseState::hospitalised));
        CHECK(to_string(DiseaseState::critical) == "critical");
    }

    TEST_CASE("invalid parameters are rejected")
    {
        auto p = ProgressionParams::defaults();
        p.p_death[3] = 1.2;
        CHECK_THROWS_AS(p.validate(), ValidationError);
        p = ProgressionParams::defaults();
        p.mean_symptomatic_days = 0.0;
        CHECK_THROWS_AS(p.validate(), ValidationError);
        p = ProgressionParams::defaults();
        p.infectiousness_shape = -1.0;
        CHECK_THROWS_AS(p.validate(), ValidationError);
        CHECK_NOTHROW(ProgressionParams::defaults().validate());
    }
}
