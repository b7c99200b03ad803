#include <algorithm>
#include <map>
#include <set>
#include <tuple>

#include <gtest/gtest.h>

#include "neucogar/network.hpp"
#include "oracles.hpp"

using namespace neucogar;

namespace {

PopulationSpec quiet(std::string name, std::size_t size = 1) {
    return PopulationSpec{std::move(name), size, NeuronParams{}, 0.0, 0.0};
}

std::vector<double> spike_times(const SpikeRecord& rec, std::string_view pop, std::uint32_t neuron = 0) {
    std::vector<double> out;
    const auto* p = rec.find(pop);
    for (const auto& e : rec.events) {
        if (p && e.population == p->index && e.neuron == neuron) out.push_back(rec.time_of(e));
    }
    return out;
}

}  // namespace

TEST(Network, RegistrationRoundTrip) {
    Network net;
    const auto h = net.add_population(quiet("Thalamus", 100));
    EXPECT_EQ(net.size(h), 100u);
    EXPECT_EQ(net.handle("Thalamus"), h);
    EXPECT_FALSE(net.find("Cortex").has_value());
}

TEST(Network, RejectsDuplicateAndEmptyPopulations) {
    Network net;
    net.add_population(quiet("Thalamus", 100));
    EXPECT_THROW(net.add_population(quiet("Thalamus", 5)), std::invalid_argument);
    EXPECT_THROW(net.add_population(quiet("Empty", 0)), std::invalid_argument);
}

TEST(Network, ZeroDurationGivesEmptyRecord) {
    Network net;
    net.add_population(PopulationSpec{"A", 10, NeuronParams{}, 5000.0, 50.0});
    const auto rec = net.simulate(0.0, {"A"});
    EXPECT_TRUE(rec.events.empty());
    EXPECT_EQ(rec.t_begin, rec.t_end);
}

TEST(Network, RecorderMustNameKnownPopulation) {
    Network net;
    net.add_population(quiet("A"));
    EXPECT_THROW(net.simulate(1.0, {"B"}), std::invalid_argument);
}

TEST(Network, ConnectionRuleCounts) {
    Network net(NetworkOptions{0.1, 3});
    const auto a = net.add_population(quiet("A", 3));
    const auto b = net.add_population(quiet("B", 4));
    EXPECT_EQ(net.connect(a, b, ConnectionRule::all_to_all(), 1.0, 1.0, Receptor::Glutamate), 12u);
    EXPECT_EQ(net.connect(a, b, ConnectionRule::pairwise_bernoulli(0.0), 1.0, 1.0, Receptor::Glutamate), 0u);
    EXPECT_EQ(net.connect(a, b, ConnectionRule::pairwise_bernoulli(1.0), 1.0, 1.0, Receptor::Glutamate), 12u);
    EXPECT_EQ(net.connect(a, b, ConnectionRule::fixed_outdegree(2), 1.0, 1.0, Receptor::Glutamate), 6u);
    EXPECT_THROW(net.connect(a, b, ConnectionRule::fixed_outdegree(5), 1.0, 1.0, Receptor::Glutamate),
                 std::invalid_argument);
    EXPECT_THROW(net.connect(a, b, ConnectionRule::pairwise_bernoulli(1.5), 1.0, 1.0, Receptor::Glutamate),
                 std::invalid_argument);
}

TEST(Network, FixedOutdegreeTargetsAreDistinct) {
    Network net(NetworkOptions{0.1, 9});
    const auto a = net.add_population(quiet("A", 20));
    const auto b = net.add_population(quiet("B", 30));
    net.connect(a, b, ConnectionRule::fixed_outdegree(10), 1.0, 1.0, Receptor::Glutamate);
    std::map<std::size_t, std::set<std::size_t>> targets;
    for (const auto& s : net.synapses()) {
        ASSERT_TRUE(targets[s.source.index].insert(s.target.index).second);
    }
    for (const auto& [src, t] : targets) EXPECT_EQ(t.size(), 10u);
}

TEST(Network, ReceptorSignIsEnforced) {
    Network net;
    const auto a = net.add_population(quiet("A"));
    const auto b = net.add_population(quiet("B"));
    EXPECT_THROW(net.connect(a, b, ConnectionRule::all_to_all(), 5.0, 1.0, Receptor::Gaba),
                 std::invalid_argument);
    EXPECT_THROW(net.connect(a, b, ConnectionRule::all_to_all(), -5.0, 1.0, Receptor::Glutamate),
                 std::invalid_argument);
    EXPECT_THROW(net.connect(a, b, ConnectionRule::all_to_all(), 5.0, 1.0, Receptor::DopamineD1),
                 std::invalid_argument);
    EXPECT_THROW(net.connect(a, b, ConnectionRule::all_to_all(), 5.0, 0.05, Receptor::Glutamate),
                 std::invalid_argument);
}

TEST(Network, SilentNeuronStaysSilent) {
    Network net;
    net.add_population(quiet("A"));
    EXPECT_TRUE(net.simulate(1000.0, {"A"}).events.empty());
}

TEST(Network, CurrentArrivesExactlyAfterDelay) {
    for (double delay : {0.1, 1.0, 2.5, 7.3}) {
        Network net;
        const auto a = net.add_population(quiet("A"));
        const auto b = net.add_population(quiet("B"));
        net.connect(a, b, ConnectionRule::all_to_all(), 10.0, delay, Receptor::Glutamate);
        net.enable_delivery_log();
        net.force_spike(a, 0, 3.0);
        net.simulate(20.0, {"A", "B"});
        ASSERT_EQ(net.delivery_log().size(), 1u);
        const auto& d = net.delivery_log()[0];
        EXPECT_NEAR(d.spike_step * 0.1, 3.0, 1e-9);
        EXPECT_NEAR(d.arrival_step * 0.1, 3.0 + delay, 1e-9);
    }
}

TEST(Network, SubthresholdDeliveryRaisesTargetInArrivalStep) {
    Network net;
    const auto a = net.add_population(quiet("A"));
    const auto b = net.add_population(quiet("B"));
    net.connect(a, b, ConnectionRule::all_to_all(), 10.0, 1.0, Receptor::Glutamate);
    net.force_spike(a, 0, 2.0);
    // Arrival at 3.0 ms is integrated over [3.0, 3.1].
    net.simulate(3.0, {});
    EXPECT_DOUBLE_EQ(net.state(b, 0).v, -70.0);
    net.simulate(0.1, {});
    EXPECT_GT(net.state(b, 0).v, -70.0);
    EXPECT_NEAR(net.state(b, 0).v, oracle::analytic_lif(-70.0, 10.0, -70.0, 1.0, 10.0, 0.1), 1e-12);
}

TEST(Network, SameSeedIsDeterministic) {
    auto run = [](std::uint64_t seed) {
        Network net(NetworkOptions{0.1, seed});
        const auto a = net.add_population(PopulationSpec{"A", 50, NeuronParams{}, 9000.0, 20.0});
        const auto b = net.add_population(PopulationSpec{"B", 50, NeuronParams{}, 7000.0, 20.0});
        net.connect(a, b, ConnectionRule::pairwise_bernoulli(0.2), 50.0, 1.0, Receptor::Glutamate);
        net.connect(b, a, ConnectionRule::pairwise_bernoulli(0.2), -50.0, 2.0, Receptor::Gaba);
        return net.simulate(200.0, {"A", "B"});
    };
    const auto r1 = run(4);
    EXPECT_FALSE(r1.events.empty());
    EXPECT_EQ(r1, run(4));
    EXPECT_NE(r1.events, run(5).events);
}

TEST(Network, RecordingDoesNotChangeDynamics) {
    auto run = [](std::set<std::string> rec) {
        Network net(NetworkOptions{0.1, 8});
        const auto a = net.add_population(PopulationSpec{"A", 40, NeuronParams{}, 9000.0, 20.0});
        const auto b = net.add_population(PopulationSpec{"B", 40, NeuronParams{}, 7000.0, 20.0});
        net.connect(a, b, ConnectionRule::pairwise_bernoulli(0.3), 40.0, 1.0, Receptor::Glutamate);
        return net.simulate(200.0, rec);
    };
    const auto both = run({"A", "B"});
    const auto only_b = run({"B"});
    std::vector<SpikeEvent> b_events;
    for (const auto& e : both.events) {
        if (e.population == 1) b_events.push_back(e);
    }
    EXPECT_FALSE(b_events.empty());
    EXPECT_EQ(b_events, only_b.events);
}

TEST(Network, EventsOrderedByTimeThenPopulationThenNeuron) {
    Network net(NetworkOptions{0.1, 2});
    net.add_population(PopulationSpec{"Zeta", 30, NeuronParams{}, 9000.0, 20.0});
    net.add_population(PopulationSpec{"Alpha", 30, NeuronParams{}, 9000.0, 20.0});
    const auto rec = net.simulate(100.0, {"Zeta", "Alpha"});
    ASSERT_EQ(rec.populations.size(), 2u);
    EXPECT_EQ(rec.populations[0].name, "Alpha");
    ASSERT_GT(rec.events.size(), 100u);
    for (std::size_t i = 1; i < rec.events.size(); ++i) {
        const auto& x = rec.events[i - 1];
        const auto& y = rec.events[i];
        const auto key = [&](const SpikeEvent& e) {
            return std::tuple(e.step, rec.find(e.population)->name, e.neuron);
        };
        ASSERT_LT(key(x), key(y));
    }
}

TEST(Network, DeliveriesAreCausalAndConserved) {
    Network net(NetworkOptions{0.1, 6});
    const auto a = net.add_population(PopulationSpec{"A", 30, NeuronParams{}, 9000.0, 20.0});
    const auto b = net.add_population(quiet("B", 20));
    net.connect(a, b, ConnectionRule::pairwise_bernoulli(0.2), 30.0, 1.5, Receptor::Glutamate);
    net.enable_delivery_log();
    const auto rec = net.simulate(100.0, {"A"});
    std::vector<std::size_t> out_degree(30, 0);
    for (const auto& s : net.synapses()) ++out_degree[s.source.index];
    std::size_t expected = 0;
    for (const auto& e : rec.events) expected += out_degree[e.neuron];
    ASSERT_GT(expected, 0u);
    EXPECT_EQ(net.delivery_log().size(), expected);
    for (const auto& d : net.delivery_log()) {
        EXPECT_EQ(d.arrival_step - d.spike_step, 15);
        EXPECT_LT(d.spike_step, d.arrival_step);
    }
}

TEST(Network, InhibitionNeverAddsSpikes) {
    auto count = [](bool with_gaba, std::uint64_t seed) {
        Network net(NetworkOptions{0.1, seed});
        const auto drive = net.add_population(PopulationSpec{"D", 1, NeuronParams{}, 200.0, 400.0});
        const auto target = net.add_population(PopulationSpec{"T", 1, NeuronParams{}, 9000.0, 20.0});
        if (with_gaba) net.connect(drive, target, ConnectionRule::all_to_all(), -60.0, 1.0, Receptor::Gaba);
        return net.simulate(500.0, {"T"}).events.size();
    };
    std::size_t total_with = 0;
    std::size_t total_without = 0;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        const auto with = count(true, seed);
        const auto without = count(false, seed);
        EXPECT_LE(with, without) << "seed " << seed;
        total_with += with;
        total_without += without;
    }
    EXPECT_GT(total_without, 0u);
    EXPECT_LT(total_with, total_without);
}

TEST(Network, ForcedSpikeValidation) {
    Network net;
    const auto a = net.add_population(quiet("A", 2));
    EXPECT_THROW(net.force_spike(a, 2, 1.0), std::invalid_argument);
    net.simulate(5.0, {});
    EXPECT_THROW(net.force_spike(a, 0, 4.0), std::invalid_argument);
}

TEST(Network, AgreesWithReferenceSimulator) {
    // Random small networks driven only by forced spikes.
    for (std::uint64_t trial = 0; trial < 20; ++trial) {
        RandomStream rng(trial, StreamPurpose::Test);
        const int n = 5;
        oracle::LifParams lp;
        lp.t_refractory = 0.5 + std::floor(rng.uniform() * 20.0) * 0.1;
        std::vector<oracle::RefSynapse> ref_syn;
        Network net(NetworkOptions{0.1, 0});
        NeuronParams p;
        p.t_refractory = lp.t_refractory;
        std::vector<PopulationHandle> h;
        for (int i = 0; i < n; ++i) h.push_back(net.add_population(PopulationSpec{"N" + std::to_string(i), 1, p, 0.0, 0.0}));
        for (int s = 0; s < 12; ++s) {
            const int src = static_cast<int>(rng.uniform() * n);
            const int tgt = static_cast<int>(rng.uniform() * n);
            const bool inhibitory = rng.uniform() < 0.3;
            const double w = inhibitory ? -(50.0 + 200.0 * rng.uniform()) : 100.0 + 900.0 * rng.uniform();
            const int delay_steps = 1 + static_cast<int>(rng.uniform() * 30.0);
            ref_syn.push_back({src, tgt, w, delay_steps});
            net.connect(h[src], h[tgt], ConnectionRule::all_to_all(), w, delay_steps * 0.1,
                        inhibitory ? Receptor::Gaba : Receptor::Glutamate);
        }
        std::vector<std::pair<int, long long>> forced;
        for (int f = 0; f < 4; ++f) {
            const int i = static_cast<int>(rng.uniform() * n);
            const long long step = 1 + static_cast<long long>(rng.uniform() * 200.0);
            forced.emplace_back(i, step);
            net.force_spike(h[i], 0, step * 0.1);
        }
        const long long steps = 400;
        std::set<std::string> all;
        for (int i = 0; i < n; ++i) all.insert("N" + std::to_string(i));
        const auto rec = net.simulate(steps * 0.1, all);
        const auto expected = oracle::reference_simulate(n, lp, ref_syn, forced, steps);
        for (int i = 0; i < n; ++i) {
            std::vector<long long> got;
            for (const auto& e : rec.events) {
                if (e.population == static_cast<std::uint32_t>(i)) got.push_back(e.step);
            }
            EXPECT_EQ(got, expected[i]) << "trial " << trial << " neuron " << i;
        }
    }
}

TEST(Network, ForcedSpikeTimesAreExact) {
    Network net;
    const auto a = net.add_population(quiet("A"));
    net.force_spike(a, 0, 1.0);
    net.force_spike(a, 0, 1.5);  // inside refractoriness, still forced
    const auto rec = net.simulate(3.0, {"A"});
    const auto t = spike_times(rec, "A");
    ASSERT_EQ(t.size(), 2u);
    EXPECT_NEAR(t[0], 1.0, 1e-12);
    EXPECT_NEAR(t[1], 1.5, 1e-12);
}
