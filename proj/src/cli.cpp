#include "dam/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <atomic>
#include <fstream>
#include <sstream>
#include <thread>

#include "dam/bisim.hpp"
#include "dam/ces.hpp"
#include "dam/cesh.hpp"
#include "dam/dcesh.hpp"
#include "dam/dcesh1.hpp"
#include "dam/syntax.hpp"

namespace dam {

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

bool ends_with(const std::string& s, const std::string& suffix) {
    return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

int verdict_exit(Verdict v) {
    switch (v) {
        case Verdict::Halted: return exit_code::ok;
        case Verdict::FuelExhausted: return exit_code::fuel_exhausted;
        case Verdict::Stuck: return exit_code::stuck;
    }
    return exit_code::stuck;
}

template <class O>
int report(const O& o, const std::string& value, std::ostream& out) {
    if (o.verdict == Verdict::Halted) {
        out << "value: " << value << "\n";
    } else if (o.verdict == Verdict::Stuck) {
        out << "stuck: " << o.reason << "\n";
    } else {
        out << "fuel exhausted\n";
    }
    out << "steps: " << o.steps << "\n";
    return verdict_exit(o.verdict);
}

std::string rule_line(std::uint64_t t, const char* machine, Rule r) {
    return "t=" + std::to_string(t) + " machine=" + machine + " rule=" + std::string(rule_name(r));
}

std::pair<std::uint64_t, std::uint64_t> parse_range(const std::string& s) {
    auto dots = s.find("..");
    if (dots == std::string::npos) throw InputError("seed range must look like A..B");
    try {
        std::uint64_t lo = std::stoull(s.substr(0, dots));
        std::uint64_t hi = std::stoull(s.substr(dots + 2));
        if (hi < lo) throw InputError("empty seed range " + s);
        return {lo, hi};
    } catch (const std::logic_error&) {
        throw InputError("bad seed range " + s);
    }
}

struct CheckLine {
    bool ok = true;
    std::string text;
};

CheckLine check_one(const std::string& label, const CodeTable& table, const CheckConfig& cfg) {
    LockstepOptions opts;
    opts.fuel = cfg.fuel;
    opts.rank = cfg.rank;
    opts.nodes = cfg.nodes;
    opts.root = cfg.root;
    if (cfg.heap_fault_step) {
        std::uint64_t at = *cfg.heap_fault_step;
        opts.mutate = [at](std::uint64_t step, CeshConfig& c) {
            if (step == at) corrupt_reachable_cell(c);
        };
    }
    CheckLine line;
    std::ostringstream os;
    auto rep = lockstep(table, opts);
    os << label << " verdict=" << lockstep_verdict_name(rep.verdict) << " steps=" << rep.steps
       << " value=" << (rep.verdict == LockstepVerdict::AllAgree ? rep.value : "-");
    if (rep.verdict != LockstepVerdict::AllAgree) {
        line.ok = false;
        os << " relation=" << rep.relation << " detail=\"" << rep.detail << "\"";
    } else {
        auto eq = check_async_equiv(table, cfg.fuel, cfg.nodes, cfg.root);
        if (!eq.ok) {
            line.ok = false;
            os << " async=mismatch detail=\"" << eq.detail << "\"";
        }
    }
    line.text = os.str();
    return line;
}

}  // namespace

CodeTable load_program(const std::string& path) {
    std::string text = read_file(path);
    if (ends_with(path, ".dam")) return deserialize(text);
    return compile(*load_source(text).term);
}

int cmd_compile(const std::string& in, const std::string& out_path, std::ostream& out, std::ostream& err) {
    try {
        CodeTable table = compile(*load_source(read_file(in)).term);
        std::string target = out_path;
        if (target.empty()) {
            target = ends_with(in, ".lam") ? in.substr(0, in.size() - 4) + ".dam" : in + ".dam";
        }
        std::string text = serialize(table);
        if (target == "-") {
            out << text;
        } else {
            std::ofstream f(target, std::ios::binary);
            if (!f) throw InputError("cannot write " + target);
            f << text;
        }
        out << "instructions: " << instruction_count(table) << "\n";
        out << "entries: " << table.entries.size() << "\n";
        return exit_code::ok;
    } catch (const InputError& e) {
        err << "error: " << e.what() << "\n";
        return exit_code::input_error;
    }
}

int cmd_run(const std::string& prog, const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    CodeTable table;
    try {
        table = load_program(prog);
        if (cfg.machine == MachineKind::Dcesh) check_placement(table, cfg.root, cfg.nodes);
        if (cfg.machine == MachineKind::Dcesh1 && !remote_nodes(table).empty()) {
            throw InputError("the single-node machine cannot run programs that contain REMOTE");
        }
    } catch (const InputError& e) {
        err << "error: " << e.what() << "\n";
        return exit_code::input_error;
    }
    Scheduler sched = cfg.seed ? Scheduler::random(*cfg.seed) : Scheduler::fifo();

    switch (cfg.machine) {
        case MachineKind::Ces: {
            std::function<void(std::uint64_t, Rule, const CesConfig&)> obs;
            if (cfg.trace) obs = [&](std::uint64_t t, Rule r, const CesConfig&) { out << rule_line(t, "ces", r) << "\n"; };
            auto o = run_ces(table, cfg.fuel, obs);
            return report(o, o.value ? show_value(*o.value) : "", out);
        }
        case MachineKind::Cesh: {
            std::function<void(std::uint64_t, Rule, const CeshConfig&)> obs;
            if (cfg.trace) {
                obs = [&](std::uint64_t t, Rule r, const CeshConfig&) { out << rule_line(t, "cesh", r) << "\n"; };
            }
            auto o = run_cesh(table, cfg.fuel, obs);
            int code = report(o, o.value ? show_value(*o.value, o.last.heap) : "", out);
            if (cfg.dump_heap && o.verdict == Verdict::Halted) out << dump_heap(o.last.heap);
            return code;
        }
        case MachineKind::Dcesh1: {
            Dcesh1Semantics sem(table, dcesh1_node());
            if (cfg.net == NetKind::Async) {
                std::function<void(std::uint64_t, const AsyncEvent<D1Msg>&)> obs;
                if (cfg.trace) {
                    obs = [&](std::uint64_t t, const AsyncEvent<D1Msg>& e) { out << format_event(t, e, sem) << "\n"; };
                }
                auto o = run_dcesh1(table, cfg.fuel, sched, nullptr, obs);
                const auto& m = o.last.nodes.at(dcesh1_node());
                return report(o, o.value ? show_value(*o.value, m) : "", out);
            }
            std::function<void(std::uint64_t, const SyncEvent<D1Msg>&)> obs;
            if (cfg.trace) {
                obs = [&](std::uint64_t t, const SyncEvent<D1Msg>& e) { out << format_event(t, e, sem) << "\n"; };
            }
            SyncNet<D1Machine> net;
            net.emplace(dcesh1_node(), dcesh1_initial(table));
            auto halted = [&](const SyncNet<D1Machine>& n) { return sem.halted(n.at(dcesh1_node())); };
            auto o = run_sync(std::move(net), sem, cfg.fuel, halted, nullptr, obs);
            const auto& m = o.last.at(dcesh1_node());
            return report(o, o.value ? show_value(*o.value, m) : "", out);
        }
        case MachineKind::Dcesh: {
            DceshSemantics sem(table);
            if (cfg.net == NetKind::Async) {
                std::function<void(std::uint64_t, const AsyncEvent<DMsg>&)> obs;
                if (cfg.trace) {
                    obs = [&](std::uint64_t t, const AsyncEvent<DMsg>& e) { out << format_event(t, e, sem) << "\n"; };
                }
                auto o = run_dcesh_async(table, cfg.root, cfg.nodes, cfg.fuel, sched, nullptr, obs);
                int code = report(o, o.value ? show_value(*o.value, o.last.nodes) : "", out);
                out << "messages: " << o.stats.sends << "\n";
                out << "heaps: " << show_heap_sizes(o.last.nodes) << "\n";
                return code;
            }
            std::function<void(std::uint64_t, const SyncEvent<DMsg>&)> obs;
            if (cfg.trace) {
                obs = [&](std::uint64_t t, const SyncEvent<DMsg>& e) { out << format_event(t, e, sem) << "\n"; };
            }
            auto o = run_dcesh_sync(table, cfg.root, cfg.nodes, cfg.fuel, nullptr, obs);
            int code = report(o, o.value ? show_value(*o.value, o.last) : "", out);
            out << "messages: " << o.stats.comm << "\n";
            out << "heaps: " << show_heap_sizes(o.last) << "\n";
            return code;
        }
    }
    return exit_code::input_error;
}

int cmd_check(const CheckConfig& cfg, std::ostream& out, std::ostream& err) {
    if (!cfg.nodes.count(cfg.root)) {
        err << "error: root node " << cfg.root.str() << " is not in the node set\n";
        return exit_code::input_error;
    }
    if (cfg.file) {
        CodeTable table;
        try {
            table = load_program(*cfg.file);
            check_placement(table, cfg.root, cfg.nodes);
        } catch (const InputError& e) {
            err << "error: " << e.what() << "\n";
            return exit_code::input_error;
        }
        auto line = check_one("program=" + *cfg.file, table, cfg);
        out << line.text << "\n";
        return line.ok ? exit_code::ok : exit_code::check_failed;
    }

    std::vector<NodeName> node_list(cfg.nodes.begin(), cfg.nodes.end());
    std::size_t count = static_cast<std::size_t>(cfg.seed_hi - cfg.seed_lo + 1);
    std::vector<CheckLine> lines(count);
    std::atomic<std::size_t> next{0};
    unsigned jobs = cfg.jobs ? cfg.jobs : std::max(1u, std::thread::hardware_concurrency());
    jobs = static_cast<unsigned>(std::min<std::size_t>(jobs, count));
    auto worker = [&]() {
        for (std::size_t k; (k = next.fetch_add(1)) < count;) {
            std::uint64_t seed = cfg.seed_lo + k;
            auto t = gen_term(seed, cfg.size, node_list);
            lines[k] = check_one("seed=" + std::to_string(seed), compile(*t), cfg);
        }
    };
    std::vector<std::thread> pool;
    for (unsigned j = 0; j < jobs; ++j) pool.emplace_back(worker);
    for (auto& th : pool) th.join();

    const CheckLine* first_bad = nullptr;
    for (const auto& l : lines) {
        out << l.text << "\n";
        if (!l.ok && !first_bad) first_bad = &l;
    }
    if (first_bad) {
        err << "first failure: " << first_bad->text << "\n";
        return exit_code::check_failed;
    }
    return exit_code::ok;
}

int cmd_gen(std::uint64_t seed, std::size_t size, const std::set<NodeName>& nodes, std::ostream& out) {
    std::vector<NodeName> node_list(nodes.begin(), nodes.end());
    out << print_surface(*gen_term(seed, size, node_list)) << "\n";
    return exit_code::ok;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"dam: compiler and abstract machines for a language with node placement annotations"};
    app.require_subcommand(1);

    std::string in_path, out_path;
    auto* compile_cmd = app.add_subcommand("compile", "compile a .lam source file to .dam bytecode");
    compile_cmd->add_option("input", in_path, "source file")->required();
    compile_cmd->add_option("-o,--output", out_path, "output path ('-' for standard output)");

    RunConfig rc;
    std::string prog, machine = "ces", net = "sync", nodes = "A", root = "A";
    std::optional<std::uint64_t> seed;
    auto* run_cmd = app.add_subcommand("run", "run a program on one machine");
    run_cmd->add_option("program", prog, ".lam or .dam file")->required();
    run_cmd->add_option("--machine", machine, "ces | cesh | dcesh1 | dcesh")
        ->check(CLI::IsMember({"ces", "cesh", "dcesh1", "dcesh"}));
    run_cmd->add_option("--net", net, "sync | async")->check(CLI::IsMember({"sync", "async"}));
    run_cmd->add_option("--fuel", rc.fuel, "maximum number of steps");
    run_cmd->add_option("--nodes", nodes, "comma-separated node names");
    run_cmd->add_option("--root", root, "node holding the initial thread");
    run_cmd->add_flag("--trace", rc.trace, "print one line per step");
    run_cmd->add_option("--seed", seed, "seed for the random async scheduler");
    run_cmd->add_flag("--dump-heap", rc.dump_heap, "print the CESH heap at halt");

    CheckConfig cc;
    std::string check_file, seeds, cnodes = "A", croot = "A";
    auto* check_cmd = app.add_subcommand("check", "lockstep-check a program or a generated corpus");
    check_cmd->add_option("program", check_file, ".lam or .dam file");
    check_cmd->add_option("--seeds", seeds, "seed range A..B");
    check_cmd->add_option("--size", cc.size, "generated term size");
    check_cmd->add_option("--fuel", cc.fuel, "maximum number of steps");
    check_cmd->add_option("--rank", cc.rank, "rank bound for the distributed relation");
    check_cmd->add_option("--nodes", cnodes, "comma-separated node names");
    check_cmd->add_option("--root", croot, "root node");
    check_cmd->add_option("--jobs", cc.jobs, "worker threads (0: one per core)");
    std::optional<std::uint64_t> fault;
    check_cmd->add_option("--inject-heap-fault", fault, "corrupt a reachable CESH heap cell after this step")->group("");

    std::uint64_t gseed = 0;
    std::size_t gsize = 10;
    std::string gnodes = "A";
    auto* gen_cmd = app.add_subcommand("gen", "print a generated program");
    gen_cmd->add_option("--seed", gseed, "generator seed")->required();
    gen_cmd->add_option("--size", gsize, "maximum number of AST nodes")->required()->check(CLI::PositiveNumber);
    gen_cmd->add_option("--nodes", gnodes, "comma-separated node names");

    std::vector<std::string> rev(args.rbegin(), args.rend());
    try {
        app.parse(rev);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e, out, err);
        return code == 0 ? exit_code::ok : exit_code::input_error;
    }

    try {
        if (*compile_cmd) return cmd_compile(in_path, out_path, out, err);
        if (*run_cmd) {
            rc.machine = machine == "ces"    ? MachineKind::Ces
                         : machine == "cesh" ? MachineKind::Cesh
                         : machine == "dcesh1" ? MachineKind::Dcesh1
                                               : MachineKind::Dcesh;
            rc.net = net == "async" ? NetKind::Async : NetKind::Sync;
            rc.nodes = parse_node_list(nodes);
            rc.root = NodeName(root);
            rc.seed = seed;
            return cmd_run(prog, rc, out, err);
        }
        if (*check_cmd) {
            if (check_file.empty() == seeds.empty()) {
                err << "error: give either a program or --seeds\n";
                return exit_code::input_error;
            }
            if (!check_file.empty()) cc.file = check_file;
            if (!seeds.empty()) std::tie(cc.seed_lo, cc.seed_hi) = parse_range(seeds);
            cc.nodes = parse_node_list(cnodes);
            cc.root = NodeName(croot);
            cc.heap_fault_step = fault;
            return cmd_check(cc, out, err);
        }
        if (*gen_cmd) return cmd_gen(gseed, gsize, parse_node_list(gnodes), out);
    } catch (const InputError& e) {
        err << "error: " << e.what() << "\n";
        return exit_code::input_error;
    }
    return exit_code::input_error;
}

}  // namespace dam
