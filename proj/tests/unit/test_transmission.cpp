#include "cohortsim/error.hpp"
#include "cohortsim/transmission.hpp"
#include "fixtures.hpp"
#include "transmission_oracle.hpp"

#include <doctest.h>

#include <cmath>

using namespace cohortsim;
using fixtures::rel_diff;

using fixtures::oracle;
using fixtures::shed;
using Fixture = fixtures::OracleWorld;

namespace {

void check_close(double got, double want)
{
    CHECK(rel_diff(got, want) <= 1e-12);
}

} // namespace

TEST_SUITE("transmission")
{
    TEST_CASE("every space matches the straight-line oracle on twenty agents")
    {
        Fixture f;
        TransmissionParams p;
        TransmissionModel model(f.city, p);
        const auto agg = model.aggregate(f.health, f.kappa);
        const auto trains = model.train_rates(f.plan.cohorts, f.asg, f.net, f.health, f.kappa);
        double train_total = 0.0;
        for (AgentId a = 0; a < 20; ++a) {
            const auto got = model.lambda(a, f.kappa[static_cast<std::size_t>(a)], agg, &trains, f.plan.cohort_of_agent);
            const auto want = oracle(f, p, a);
            check_close(got.home, want.home);
            check_close(got.workplace, want.workplace);
            check_close(got.subnetwork, want.subnetwork);
            check_close(got.community, want.community);
            check_close(got.trains, want.trains);
            check_close(got.total(), want.total());
            CHECK(got.total() >= 0.0);
            train_total += got.trains;
        }
        CHECK(train_total > 0.0);
    }

    TEST_CASE("free household and cohort formulas agree with the oracle")
    {
        Fixture f;
        TransmissionParams p;
        for (const auto& h : f.city.households) {
            const double got = lambda_household(h.members, f.health, f.kappa, p);
            double sum = 0;
            for (const AgentId m : h.members) sum += shed(f, static_cast<std::size_t>(m), Space::home);
            check_close(got, p.beta_home * std::pow(4.0, -0.8) * sum);
        }
        std::vector<double> intra;
        for (const auto& c : f.plan.cohorts) intra.push_back(lambda_intra_cohort(c, f.health, f.kappa, p));
        TransmissionModel model(f.city, p);
        const auto rates = model.train_rates(f.plan.cohorts, f.asg, f.net, f.health, f.kappa);
        for (const auto& c : f.plan.cohorts) {
            check_close(rates.intra[static_cast<std::size_t>(c.id)], intra[static_cast<std::size_t>(c.id)]);
            check_close(rates.inter[static_cast<std::size_t>(c.id)],
                        lambda_inter_cohort(c, f.plan.cohorts, intra, f.asg, f.net));
        }
    }

    TEST_CASE("mean-field inter-cohort rates equal the pairwise sum at scale")
    {
        const auto net = fixtures::bundled_network();
        City city;
        const std::size_t n = 3000;
        city.wards = {{0, "w", {19.0, 72.8}, 1.0, 1.0, DensityClass::other, {1.0}}};
        std::vector<Commuter> commuters;
        Rng rng(12);
        std::uniform_int_distribution<std::size_t> pick(0, net.stations().size() - 1);
        for (std::size_t i = 0; i < n; ++i) {
            Agent a;
            a.id = static_cast<AgentId>(i);
            city.agents.push_back(a);
            StationId o = 0, d = 0;
            while (o == d) {
                o = net.stations()[pick(rng)].id;
                d = net.stations()[pick(rng)].id;
            }
            commuters.push_back({a.id, o, d});
        }
        const auto plan = form_cohorts(commuters, net, 4, 0.2, rng, n);
        const auto asg = assign_coaches(plan.cohorts, net, 0, CoachCapacity{40, 2.0, 5}, rng);
        std::vector<AgentHealth> health(n);
        std::vector<Modulation> kappa(n);
        for (std::size_t i = 0; i < n; ++i) {
            if (i % 9 == 0) {
                health[i].state = DiseaseState::symptomatic;
                health[i].infectiousness = static_cast<float>(0.1 + uniform01(rng));
            }
            kappa[i][Space::train] = static_cast<float>(uniform01(rng));
        }
        TransmissionParams p;
        TransmissionModel model(city, p);
        const auto rates = model.train_rates(plan.cohorts, asg, net, health, kappa);
        for (const auto& c : plan.cohorts) {
            const double pairwise = lambda_inter_cohort(c, plan.cohorts, rates.intra, asg, net);
            CHECK(std::abs(rates.inter[static_cast<std::size_t>(c.id)] - pairwise) <= 1e-10 * std::max(1.0, pairwise));
        }
    }

    TEST_CASE("infection probability is one minus exp of rate times step")
    {
        for (const double lambda : {0.0, 1e-6, 0.01, 0.5, 3.0, 40.0}) {
            const double want = 1.0 - std::exp(-lambda * 0.25);
            if (lambda == 0.0)
                CHECK(infection_probability(lambda, 0.25) == 0.0);
            else
                CHECK(rel_diff(infection_probability(lambda, 0.25), want) <= (lambda < 1e-3 ? 1e-9 : 1e-12));
        }
        CHECK(infection_probability(1e300, 0.25) == 1.0);
    }

    TEST_CASE("zero coefficients and zero modulation silence a space")
    {
        Fixture f;
        TransmissionParams p;
        p.beta_home = p.beta_work = p.beta_school = p.beta_community = p.beta_coach = 0.0;
        TransmissionModel model(f.city, p);
        const auto agg = model.aggregate(f.health, f.kappa);
        const auto trains = model.train_rates(f.plan.cohorts, f.asg, f.net, f.health, f.kappa);
        for (AgentId a = 0; a < 20; ++a)
            CHECK(model.lambda(a, f.kappa[static_cast<std::size_t>(a)], agg, &trains, f.plan.cohort_of_agent).total() == 0.0);

        TransmissionModel live(f.city, TransmissionParams{});
        Modulation shut;
        shut.k.fill(0.0f);
        const auto agg2 = live.aggregate(f.health, f.kappa);
        const auto trains2 = live.train_rates(f.plan.cohorts, f.asg, f.net, f.health, f.kappa);
        CHECK(live.lambda(0, shut, agg2, &trains2, f.plan.cohort_of_agent).total() == 0.0);
    }

    TEST_CASE("household rate is linear in beta and follows the size exponent")
    {
        Fixture f;
        TransmissionParams p;
        const double base = lambda_household(f.city.households[0].members, f.health, f.kappa, p);
        p.beta_home *= 2.0;
        check_close(lambda_household(f.city.households[0].members, f.health, f.kappa, p), 2.0 * base);
        p.household_alpha = 0.0;
        p.beta_home /= 2.0;
        check_close(lambda_household(f.city.households[0].members, f.health, f.kappa, p), base * std::pow(4.0, 0.8));
    }

    TEST_CASE("no one sheds when nobody is infective")
    {
        Fixture f;
        std::vector<AgentHealth> clean(20);
        TransmissionModel model(f.city, TransmissionParams{});
        const auto agg = model.aggregate(clean, f.kappa);
        for (AgentId a = 0; a < 20; ++a) CHECK(model.lambda(a, f.kappa[0], agg, nullptr, {}).total() == 0.0);
    }

    TEST_CASE("negative coefficients are rejected")
    {
        TransmissionParams p;
        p.beta_coach = -1.0;
        CHECK_THROWS_AS(p.validate(), ValidationError);
        p = TransmissionParams{};
        p.household_alpha = 1.5;
        CHECK_THROWS_AS(p.validate(), ValidationError);
    }
}
