#pragma once

#include "wh/classify.hpp"
#include "wh/matrix_function.hpp"

#include <map>
#include <string>
#include <utility>
#include <vector>

namespace wh {

// Parsed problem file: constants, ordered radical definitions, matrix
// entry expressions, and options.
struct ProblemSpec {
    int format_version = 1;
    std::vector<std::pair<std::string, Complex>> constants;          // in input order
    std::vector<std::pair<std::string, std::string>> radicals;       // name -> source
    std::vector<std::vector<std::string>> matrix_rows;               // row-major sources
    std::map<std::string, std::string> options;                      // raw option strings

    std::string source_text;
    std::string path;
};

ProblemSpec parse_problem_text(const std::string& text, const std::string& path_label);
ProblemSpec parse_problem_file(const std::string& path);

// Builds the matrix with the shared radical tower (named radicals first,
// in definition order). Throws InputError on non-square input or
// unresolvable names.
MatrixFunction build_matrix(const ProblemSpec& spec);

// Applies [options] onto a config; unknown keys are rejected.
ClassifyConfig build_config(const ProblemSpec& spec);

double anchor_from(const ProblemSpec& spec);

} // namespace wh
