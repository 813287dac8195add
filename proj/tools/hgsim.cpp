// hgsim: seeded hashgraph simulations, delay attacks, trace checks and
// coin-round probability tables.
//
// Exit codes: 0 success, 1 usage or configuration error, 2 consistency or
// invariant violation, 3 stalled run.

#include "hashgraph/attack.hpp"
#include "hashgraph/probability.hpp"
#include "hashgraph/simnet.hpp"
#include "hashgraph/verify.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <numeric>
#include <sstream>

namespace fs = std::filesystem;
using namespace hashgraph;

namespace {

constexpr int kOk = 0;
constexpr int kUsage = 1;
constexpr int kViolation = 2;
constexpr int kStalled = 3;

struct Flags {
    std::uint32_t n = 4;
    std::uint32_t t = 0;
    std::string corrupted;
    int coin_period = consensus::CoinPeriod::kDefault;
    std::uint64_t seed = 1;
    std::string seeds;
    std::uint64_t max_steps = 100000;
    std::uint64_t steps = 0;
    std::string tx_file;
    std::string out = "out";
    bool dot = false;
    std::string scheduler = "fair";
    std::string config;
    PartyId target_witness = 0;
    int max_rounds = 200;
    std::string trace;
    std::uint32_t n_min = 7;
    std::uint32_t n_max = 22;
};

std::vector<PartyId> parse_list(const std::string& s)
{
    std::vector<PartyId> out;
    std::stringstream in(s);
    std::string item;
    while (std::getline(in, item, ','))
        if (!item.empty()) out.push_back(static_cast<PartyId>(std::stoul(item)));
    return out;
}

// "7", "1..500" or "1-500"
std::vector<std::uint64_t> parse_seeds(const std::string& s, std::uint64_t single)
{
    if (s.empty()) return {single};
    auto sep = s.find("..");
    std::size_t skip = 2;
    if (sep == std::string::npos) {
        sep = s.find('-');
        skip = 1;
    }
    if (sep == std::string::npos) return {std::stoull(s)};
    const std::uint64_t lo = std::stoull(s.substr(0, sep));
    const std::uint64_t hi = std::stoull(s.substr(sep + skip));
    if (hi < lo) throw sim::ConfigError("empty seed range " + s);
    std::vector<std::uint64_t> out(hi - lo + 1);
    std::iota(out.begin(), out.end(), lo);
    return out;
}

// One "step party tx" triple per line; '#' starts a comment.
std::vector<sim::TxInjection> read_tx_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw sim::ConfigError("cannot read transaction file " + path);
    std::vector<sim::TxInjection> out;
    std::string line;
    while (std::getline(in, line)) {
        if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
        std::istringstream fields(line);
        sim::TxInjection inj;
        std::string tx;
        if (!(fields >> inj.step)) continue;
        if (!(fields >> inj.party >> tx)) throw sim::ConfigError("malformed transaction line: " + line);
        inj.tx.assign(tx.begin(), tx.end());
        out.push_back(std::move(inj));
    }
    return out;
}

// Loads a JSON config file whose fields mirror SimConfig; explicit flags win.
void apply_config_file(Flags& f, const CLI::App& cmd)
{
    if (f.config.empty()) return;
    std::ifstream in(f.config);
    if (!in) throw sim::ConfigError("cannot read config file " + f.config);
    const auto j = nlohmann::json::parse(in);
    auto unset = [&](const char* flag) { return cmd.count(flag) == 0; };
    if (j.contains("n") && unset("--n")) f.n = j["n"].get<std::uint32_t>();
    if (j.contains("corrupted") && unset("--corrupted") && unset("--t")) {
        std::string list;
        for (const auto& p : j["corrupted"]) list += std::to_string(p.get<PartyId>()) + ",";
        f.corrupted = list;
    }
    if (j.contains("coinPeriod") && unset("--coin-period")) f.coin_period = j["coinPeriod"].get<int>();
    if (j.contains("seed") && unset("--seed")) f.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("maxSteps") && unset("--max-steps")) f.max_steps = j["maxSteps"].get<std::uint64_t>();
    if (j.contains("txFile") && unset("--tx-file")) f.tx_file = j["txFile"].get<std::string>();
}

sim::SimConfig make_config(const Flags& f, std::uint64_t seed)
{
    sim::SimConfig cfg;
    cfg.n = f.n;
    cfg.coin_period = f.coin_period;
    cfg.seed = seed;
    cfg.max_steps = f.max_steps;
    if (!f.corrupted.empty()) {
        cfg.corrupted = parse_list(f.corrupted);
    } else {
        if (f.t >= f.n) throw sim::ConfigError("t must be smaller than n");
        for (std::uint32_t i = 0; i < f.t; ++i) cfg.corrupted.push_back(f.n - 1 - i);
    }
    cfg.validate();
    cfg.tx_injection = f.tx_file.empty() ? sim::default_tx_schedule(cfg) : read_tx_file(f.tx_file);
    cfg.validate();
    return cfg;
}

std::unique_ptr<sim::Scheduler> make_scheduler(const std::string& name, std::uint64_t seed)
{
    if (name == "fair") return std::make_unique<sim::FairScheduler>(seed);
    if (name == "random") return std::make_unique<sim::RandomScheduler>(seed);
    throw sim::ConfigError("unknown scheduler " + name + " (fair or random)");
}

void write_file(const fs::path& p, const std::string& content)
{
    fs::create_directories(p.parent_path());
    std::ofstream out(p, std::ios::binary);
    out << content;
}

std::string dump_trace(const sim::Trace& t)
{
    std::ostringstream out;
    t.write_jsonl(out);
    return out.str();
}

void write_graphs(const sim::Simulation& s, const fs::path& dir)
{
    for (const auto& p : s.parties()) {
        std::ostringstream dot;
        sim::write_dot(p.graph, dot);
        write_file(dir / "graphs" / ("party_" + std::to_string(p.id) + ".dot"), dot.str());
    }
}

int cmd_simulate(const Flags& f)
{
    const auto seeds = parse_seeds(f.seeds, f.seed);
    const bool single = seeds.size() == 1;
    const fs::path out(f.out);
    std::vector<sim::MetricsRow> rows;
    int code = kOk;
    for (std::uint64_t seed : seeds) {
        const sim::SimConfig cfg = make_config(f, seed);
        sim::SimOptions opts;
        opts.record_trace = single;
        opts.scheduler_name = f.scheduler;
        sim::Simulation s(cfg, opts);
        auto scheduler = make_scheduler(f.scheduler, seed);
        try {
            s.run_for(*scheduler, f.steps);
            s.run_until_committed(*scheduler);
        } catch (const sim::Stalled& e) {
            std::cerr << "seed " << seed << ": stalled: " << e.what() << '\n';
            code = std::max(code, kStalled);
        }
        if (const auto& v = s.violation()) {
            std::cerr << "seed " << seed << ": prefix violation between party " << v->i << " and party " << v->j
                      << " at index " << v->index << '\n';
            code = kViolation;
        }
        rows.push_back(s.metrics());
        if (single) {
            write_file(out / "trace.jsonl", dump_trace(s.trace()));
            if (f.dot) write_graphs(s, out);
        }
    }
    std::ostringstream csv;
    sim::write_metrics_csv(rows, csv);
    write_file(out / "metrics.csv", csv.str());
    std::cout << "simulate: " << seeds.size() << " run(s), n=" << f.n << ", scheduler=" << f.scheduler
              << ", exit " << code << '\n';
    return code;
}

int cmd_attack(const Flags& f)
{
    if (f.n < attack::kMinParties) {
        std::cerr << "attack refused: the delay attack construction requires n >= 7 parties (got n=" << f.n
                  << "); smaller n needs a different strategy that is not implemented\n";
        return kUsage;
    }
    if (f.target_witness >= f.n) throw sim::ConfigError("target witness party out of range");
    const auto seeds = parse_seeds(f.seeds, f.seed);
    const bool single = seeds.size() == 1;
    const fs::path out(f.out);
    std::ostringstream stats_csv;
    stats_csv << attack::kStatsHeader << '\n';
    std::vector<sim::MetricsRow> rows;
    int code = kOk;
    std::uint64_t coin_rounds = 0;
    std::uint64_t supermajorities = 0;
    double rounds_sum = 0;
    double overhead_sum = 0;
    std::uint64_t decided = 0;
    for (std::uint64_t seed : seeds) {
        sim::SimConfig cfg;
        cfg.n = f.n;
        cfg.coin_period = f.coin_period;
        cfg.seed = seed;
        sim::SimOptions opts;
        opts.record_trace = single;
        opts.scheduler_name = "attack";
        sim::Simulation s(cfg, opts);
        const EventId x = s.observer().id_at(s.observer().by_creator(f.target_witness).front());
        attack::DelayStats st;
        try {
            st = attack::run_delay_attack(s, x, f.max_rounds);
        } catch (const attack::ConstructionFailed& e) {
            std::cerr << "seed " << seed << ": construction failed: " << e.what() << '\n';
            code = kViolation;
            continue;
        }
        for (const auto& failure : st.failures) {
            std::cerr << "seed " << seed << ": " << failure << '\n';
            code = kViolation;
        }
        stats_csv << attack::stats_csv_row(seed, f.n, f.coin_period, st) << '\n';
        rows.push_back(s.metrics());
        coin_rounds += st.per_coin_round_yes_counts.size();
        supermajorities += st.supermajority_round ? 1 : 0;
        if (st.decided_at && st.supermajority_round && !st.control_lost_round) {
            ++decided;
            rounds_sum += st.rounds_elapsed;
            overhead_sum += *st.overhead();
        }
        if (single) {
            write_file(out / "trace.jsonl", dump_trace(s.trace()));
            if (f.dot) write_graphs(s, out);
        }
    }
    write_file(out / "delay_stats.csv", stats_csv.str());
    std::ostringstream csv;
    sim::write_metrics_csv(rows, csv);
    write_file(out / "metrics.csv", csv.str());

    const auto p = attack::exact_supermajority_prob(f.n);
    std::cout << std::fixed << std::setprecision(4);
    std::cout << "attack: " << seeds.size() << " run(s), n=" << f.n << ", c=" << f.coin_period << '\n';
    if (coin_rounds > 0)
        std::cout << "coin rounds with a supermajority: " << supermajorities << "/" << coin_rounds << " = "
                  << static_cast<double>(supermajorities) / static_cast<double>(coin_rounds) << " (exact "
                  << p.str() << " = " << p.value() << ")\n";
    if (decided > 0) {
        const double overhead = overhead_sum / static_cast<double>(decided);
        std::cout << "mean rounds to decision: " << rounds_sum / static_cast<double>(decided) << " (c/p + overhead = "
                  << f.coin_period * attack::expected_coin_rounds(f.n) + overhead << ", overhead " << overhead
                  << ")\n";
    }
    std::cout << "after a supermajority coin round the run hands over to the fair scheduler\n";
    return code;
}

int cmd_check(const Flags& f)
{
    std::ifstream in(f.trace);
    if (!in) {
        std::cerr << "cannot read trace " << f.trace << '\n';
        return kUsage;
    }
    const auto result = verify::verify_trace(sim::Trace::read_jsonl(in));
    if (!result.ok()) {
        std::cerr << "mismatch at record " << result.mismatch->line << ": " << result.mismatch->what << '\n';
        return kViolation;
    }
    std::cout << "check: " << result.records << " records, " << result.events << " events, consistent\n";
    return kOk;
}

int cmd_probe(const Flags& f)
{
    if (f.n_min < 1 || f.n_max > attack::kMaxCoins || f.n_min > f.n_max)
        throw sim::ConfigError("probe range must lie within [1, 62]");
    std::cout << "n,exactProb,exactValue,expectedCoinRounds,hoeffdingBound,oneSidedTail,tailWithinBound\n";
    std::cout << std::fixed << std::setprecision(6);
    for (std::uint32_t n = f.n_min; n <= f.n_max; ++n) {
        const auto p = attack::exact_supermajority_prob(n);
        const auto tail = attack::one_sided_tail(n);
        const double bound = attack::hoeffding_bound(n);
        std::cout << n << ',' << p.str() << ',' << p.value() << ',' << attack::expected_coin_rounds(n) << ','
                  << bound << ',' << tail.str() << ',' << (tail.value() <= bound ? "true" : "false") << '\n';
    }
    return kOk;
}

void add_sim_flags(CLI::App* cmd, Flags& f)
{
    cmd->add_option("--n", f.n, "number of parties")->capture_default_str();
    cmd->add_option("--coin-period", f.coin_period, "coin round period c")->capture_default_str();
    cmd->add_option("--seed", f.seed, "execution seed")->capture_default_str();
    cmd->add_option("--seeds", f.seeds, "seed range for a campaign, e.g. 1..200");
    cmd->add_option("--out", f.out, "output directory")->capture_default_str();
    cmd->add_flag("--dot", f.dot, "write graphs/party_<i>.dot");
    cmd->add_option("--config", f.config, "JSON config file; flags take precedence");
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"hgsim: hashgraph consensus simulator"};
    app.require_subcommand(1);
    Flags f;

    auto* simulate = app.add_subcommand("simulate", "run seeded simulations and check prefix consistency");
    add_sim_flags(simulate, f);
    simulate->add_option("--t", f.t, "number of forking parties (the highest ids)")->capture_default_str();
    simulate->add_option("--corrupted", f.corrupted, "comma list of forking parties, overrides --t");
    simulate->add_option("--max-steps", f.max_steps, "step budget before a run counts as stalled")
        ->capture_default_str();
    simulate->add_option("--steps", f.steps, "scheduler steps to run before waiting for commitment")
        ->capture_default_str();
    simulate->add_option("--tx-file", f.tx_file, "transaction schedule: lines of 'step party tx'");
    simulate->add_option("--scheduler", f.scheduler, "fair or random")->capture_default_str();

    auto* attack_cmd = app.add_subcommand("attack", "run the fame-delay attack");
    add_sim_flags(attack_cmd, f);
    attack_cmd->add_option("--target-witness", f.target_witness, "party whose genesis event is the target")
        ->capture_default_str();
    attack_cmd->add_option("--max-rounds", f.max_rounds, "give up after this many rounds")->capture_default_str();

    auto* check = app.add_subcommand("check", "replay a trace through the verifier");
    check->add_option("trace", f.trace, "trace.jsonl to verify")->required();

    auto* probe = app.add_subcommand("probe", "print coin-round probabilities per n as CSV");
    probe->add_option("--n-min", f.n_min, "smallest n")->capture_default_str();
    probe->add_option("--n-max", f.n_max, "largest n")->capture_default_str();

    CLI11_PARSE(app, argc, argv);
    try {
        if (simulate->parsed()) {
            apply_config_file(f, *simulate);
            return cmd_simulate(f);
        }
        if (attack_cmd->parsed()) {
            apply_config_file(f, *attack_cmd);
            return cmd_attack(f);
        }
        if (check->parsed()) return cmd_check(f);
        if (probe->parsed()) return cmd_probe(f);
    } catch (const sim::ConfigError& e) {
        std::cerr << "configuration rejected: " << e.what() << '\n';
        return kUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kViolation;
    }
    return kUsage;
}
