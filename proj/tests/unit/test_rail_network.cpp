#include "cohortsim/error.hpp"
#include "cohortsim/rail_network.hpp"
#include "fixtures.hpp"

#include <doctest.h>

#include <limits>
#include <map>
#include <queue>
#include <sstream>
#include <tuple>

using namespace cohortsim;

namespace {

// Independent shortest-time search over (station, line, legs used) states:
// ride along the current line or change line at a station for the transfer
// penalty, with at most three legs.
double oracle_time(const RailNetwork& net, StationId from, StationId to)
{
    using State = std::tuple<StationId, LineId, int>;
    std::map<State, double> best;
    using Item = std::pair<double, State>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
    for (const LineId l : net.station(from).lines) {
        best[{from, l, 1}] = 0.0;
        pq.push({0.0, {from, l, 1}});
    }
    double answer = std::numeric_limits<double>::infinity();
    while (!pq.empty()) {
        const auto [t, st] = pq.top();
        pq.pop();
        const auto [s, l, legs] = st;
        if (t > best[st]) continue;
        if (s == to) answer = std::min(answer, t);
        auto relax = [&](State next, double cost) {
            auto it = best.find(next);
            if (it == best.end() || cost < it->second) {
                best[next] = cost;
                pq.push({cost, next});
            }
        };
        const Line& line = net.line(l);
        const auto pos = *line.position_of(s);
        if (pos > 0) relax({line.stations[pos - 1], l, legs}, t + line.segment_times[pos - 1]);
        if (pos + 1 < line.stations.size()) relax({line.stations[pos + 1], l, legs}, t + line.segment_times[pos]);
        if (legs < 3) {
            for (const LineId other : net.station(s).lines) {
                if (other != l) relax({s, other, legs + 1}, t + kTransferMinutes);
            }
        }
    }
    return answer;
}

} // namespace

TEST_SUITE("rail_network")
{
    TEST_CASE("parses the sectioned text format")
    {
        const auto net = fixtures::two_line_network();
        CHECK(net.stations().size() == 7);
        CHECK(net.lines().size() == 2);
        CHECK(net.station(2).lines.size() == 2);
        CHECK(net.line(0).ride_time(0, 4) == 14.0);
        CHECK(net.line(0).ride_time(3, 1) == 7.0);
        CHECK(net.routes_ready());
    }

    TEST_CASE("write and parse round-trip")
    {
        const auto net = fixtures::two_line_network();
        std::stringstream ss;
        write_network(ss, net);
        const auto back = parse_network(ss);
        REQUIRE(back.stations().size() == net.stations().size());
        for (std::size_t i = 0; i < net.stations().size(); ++i) {
            CHECK(back.stations()[i].id == net.stations()[i].id);
            CHECK(back.stations()[i].location.lat == doctest::Approx(net.stations()[i].location.lat));
        }
        CHECK(back.line(1).segment_times == net.line(1).segment_times);
    }

    TEST_CASE("single-line trip is one leg")
    {
        const auto net = fixtures::two_line_network();
        const Route* r = net.route(0, 4);
        REQUIRE(r != nullptr);
        CHECK(r->legs.size() == 1);
        CHECK(r->total_time == 14.0);
        CHECK(r->legs[0].direction() == Direction::up);
        CHECK(net.route(4, 0)->legs[0].direction() == Direction::down);
    }

    TEST_CASE("transfer adds seven minutes")
    {
        const auto net = fixtures::two_line_network();
        const Route* r = net.route(0, 11);
        REQUIRE(r != nullptr);
        REQUIRE(r->legs.size() == 2);
        CHECK(r->legs[0].line == 0);
        CHECK(r->legs[0].alight == 2);
        CHECK(r->legs[1].board == 2);
        CHECK(r->total_time == doctest::Approx(2 + 3 + 7 + 6 + 7));
        CHECK(r->transfers() == 1);
    }

    TEST_CASE("no route to the same station or to unknown ids")
    {
        const auto net = fixtures::two_line_network();
        CHECK(net.route(3, 3) == nullptr);
        CHECK(net.route(3, 99) == nullptr);
    }

    TEST_CASE("every precomputed route matches the Dijkstra oracle on the bundled network")
    {
        const auto net = fixtures::bundled_network();
        std::size_t checked = 0;
        for (const auto& a : net.stations()) {
            for (const auto& b : net.stations()) {
                if (a.id == b.id) continue;
                const Route* r = net.route(a.id, b.id);
                const double want = oracle_time(net, a.id, b.id);
                if (!std::isfinite(want)) {
                    CHECK(r == nullptr);
                    continue;
                }
                REQUIRE(r != nullptr);
                CHECK(r->total_time == doctest::Approx(want).epsilon(1e-12));
                CHECK(r->legs.size() <= kMaxLegs);
                CHECK(r->legs.front().board == a.id);
                CHECK(r->legs.back().alight == b.id);
                for (std::size_t k = 1; k < r->legs.size(); ++k) {
                    CHECK(r->legs[k].board == r->legs[k - 1].alight);
                    CHECK(r->legs[k].line != r->legs[k - 1].line);
                }
                ++checked;
            }
        }
        CHECK(checked == net.route_count());
    }

    TEST_CASE("route preference breaks ties by legs then line ids")
    {
        Route a, b;
        a.total_time = b.total_time = 10.0;
        a.legs.resize(1);
        b.legs.resize(2);
        CHECK(route_preferred(a, b));
        CHECK_FALSE(route_preferred(b, a));
        b.legs.resize(1);
        b.legs[0].line = 1;
        CHECK(route_preferred(a, b));
        b.total_time = 9.0;
        CHECK(route_preferred(b, a));
    }

    TEST_CASE("malformed files are rejected")
    {
        auto parse = [](const std::string& text) {
            std::istringstream in(text);
            return parse_network(in);
        };
        CHECK_THROWS_AS(parse("[stations]\n0, A, 19, 72\n1, B, 19.1, 72\n[lines]\n0, 0 2\n[segment_times]\n0, 3\n"),
                        ValidationError);
        CHECK_THROWS_AS(parse("[stations]\n0, A, 19, 72\n1, B, 19.1, 72\n[lines]\n0, 0 1\n[segment_times]\n0, -3\n"),
                        ValidationError);
        CHECK_THROWS_AS(parse("[stations]\n0, A, 19, 72\n1, B, 19.1, 72\n[lines]\n0, 0 1\n[segment_times]\n0, 3 4\n"),
                        ValidationError);
        CHECK_THROWS_AS(parse("[stations]\n0, A, nineteen, 72\n"), ParseError);
        CHECK_THROWS_AS(parse("[depots]\n"), ParseError);
        CHECK_THROWS_AS(load_network("/nonexistent/network.txt"), ParseError);
    }
}
