#pragma once

#include <fstream>
#include <sstream>
#include <string>

#include "dam/bytecode.hpp"
#include "dam/syntax.hpp"

namespace dam::test {

inline std::string program_path(const std::string& name) { return std::string(DAM_PROGRAMS_DIR) + "/" + name; }

inline std::string read_program(const std::string& name) {
    std::ifstream in(program_path(name));
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline CodeTable compile_source(const std::string& src) { return compile(*load_source(src).term); }

inline const char* kCodeExample = "(fn x. x) (fn x. fn y. x)";

inline const char* kFactorial =
    "let z = fn f. (fn x. f (fn v. x x v)) (fn x. f (fn v. x x v)) in "
    "let fact = z (fn self. fn n. if0 n then 1 else n * self (n - 1)) in fact 5";

inline const char* kFactorialRemote =
    "let z = fn f. (fn x. f (fn v. x x v)) (fn x. f (fn v. x x v)) in "
    "let fact = z ((fn self. fn n. if0 n then 1 else n * self (n - 1)) @ B) in fact 5";

}  // namespace dam::test
