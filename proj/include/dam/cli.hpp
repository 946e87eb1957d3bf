#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <vector>

#include "dam/bytecode.hpp"
#include "dam/common.hpp"

namespace dam {

enum class MachineKind { Ces, Cesh, Dcesh1, Dcesh };
enum class NetKind { Sync, Async };

struct RunConfig {
    MachineKind machine = MachineKind::Ces;
    NetKind net = NetKind::Sync;
    std::uint64_t fuel = 100000;
    std::set<NodeName> nodes{NodeName("A")};
    NodeName root{"A"};
    std::optional<std::uint64_t> seed;
    std::size_t rank = 3;
    bool trace = false;
    bool dump_heap = false;
};

namespace exit_code {
constexpr int ok = 0;
constexpr int check_failed = 1;
constexpr int fuel_exhausted = 2;
constexpr int stuck = 3;
constexpr int input_error = 4;
}  // namespace exit_code

// Reads a `.lam` (compiled in memory) or `.dam` program. Throws InputError.
CodeTable load_program(const std::string& path);

int cmd_compile(const std::string& in, const std::string& out_path, std::ostream& out, std::ostream& err);
int cmd_run(const std::string& prog, const RunConfig& cfg, std::ostream& out, std::ostream& err);

struct CheckConfig {
    std::optional<std::string> file;
    std::uint64_t seed_lo = 0;
    std::uint64_t seed_hi = 0;
    std::size_t size = 30;
    std::uint64_t fuel = 100000;
    std::size_t rank = 3;
    std::set<NodeName> nodes{NodeName("A")};
    NodeName root{"A"};
    unsigned jobs = 0;  // 0: hardware concurrency
    std::optional<std::uint64_t> heap_fault_step;
};

int cmd_check(const CheckConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_gen(std::uint64_t seed, std::size_t size, const std::set<NodeName>& nodes, std::ostream& out);

// Full command line, argv[0] excluded.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace dam
