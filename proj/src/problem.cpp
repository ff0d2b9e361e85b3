#include "wh/problem.hpp"

#include "wh/error.hpp"
#include "wh/parse.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

namespace wh {

namespace {

std::string trim(const std::string& s) {
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

std::string strip_comment(const std::string& line) {
    const std::size_t hash = line.find('#');
    return hash == std::string::npos ? line : line.substr(0, hash);
}

} // namespace

ProblemSpec parse_problem_text(const std::string& text, const std::string& path_label) {
    ProblemSpec spec;
    spec.source_text = text;
    spec.path = path_label;

    enum class Section { None, Constants, Radicals, Matrix, Options };
    Section section = Section::None;

    std::istringstream in(text);
    std::string raw;
    int line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        const std::string line = trim(strip_comment(raw));
        if (line.empty()) continue;

        if (line.front() == '[') {
            if (line == "[constants]") section = Section::Constants;
            else if (line == "[radicals]") section = Section::Radicals;
            else if (line == "[matrix]") section = Section::Matrix;
            else if (line == "[options]") section = Section::Options;
            else
                throw InputError(path_label + ":" + std::to_string(line_no) +
                                 ": unknown section " + line);
            continue;
        }

        if (section == Section::Matrix) {
            std::vector<std::string> row;
            std::string cell;
            std::istringstream cells(line);
            while (std::getline(cells, cell, ',')) {
                cell = trim(cell);
                if (cell.empty())
                    throw InputError(path_label + ":" + std::to_string(line_no) +
                                     ": empty matrix entry");
                row.push_back(cell);
            }
            if (row.empty())
                throw InputError(path_label + ":" + std::to_string(line_no) +
                                 ": empty matrix row");
            spec.matrix_rows.push_back(std::move(row));
            continue;
        }

        const std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw InputError(path_label + ":" + std::to_string(line_no) +
                             ": expected 'name = value'");
        const std::string name = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (name.empty() || value.empty())
            throw InputError(path_label + ":" + std::to_string(line_no) +
                             ": expected 'name = value'");

        switch (section) {
            case Section::None:
                if (name == "format_version") {
                    spec.format_version = std::stoi(value);
                    if (spec.format_version != 1)
                        throw InputError("unsupported format_version " + value);
                } else {
                    throw InputError(path_label + ":" + std::to_string(line_no) +
                                     ": '" + name + "' outside any section");
                }
                break;
            case Section::Constants:
                try {
                    spec.constants.emplace_back(name, parse_complex_literal(value));
                } catch (const Error& e) {
                    throw InputError(path_label + ":" + std::to_string(line_no) + ": " +
                                     e.what());
                }
                break;
            case Section::Radicals:
                spec.radicals.emplace_back(name, value);
                break;
            case Section::Options:
                spec.options[name] = value;
                break;
            case Section::Matrix:
                break;  // handled above
        }
    }

    if (spec.matrix_rows.empty())
        throw InputError(path_label + ": no [matrix] section or it is empty");
    return spec;
}

ProblemSpec parse_problem_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot read problem file " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_problem_text(buf.str(), path);
}

MatrixFunction build_matrix(const ProblemSpec& spec) {
    SymbolTable symbols;
    for (const auto& [name, value] : spec.constants) symbols.define(name, value);

    std::vector<Expr> tower_seed;
    for (const auto& [name, source] : spec.radicals) {
        Expr radical;
        try {
            radical = parse_expression(source, symbols);
        } catch (const ParseError& e) {
            throw InputError("radical " + name + ": " + e.what());
        }
        symbols.define(name, radical);
        tower_seed.push_back(radical);
    }

    const std::size_t dim = spec.matrix_rows.size();
    std::vector<Expr> entries;
    entries.reserve(dim * dim);
    for (std::size_t i = 0; i < dim; ++i) {
        if (spec.matrix_rows[i].size() != dim)
            throw InputError("matrix is not square: row " + std::to_string(i + 1) +
                             " has " + std::to_string(spec.matrix_rows[i].size()) +
                             " entries, expected " + std::to_string(dim));
        for (std::size_t j = 0; j < dim; ++j) {
            try {
                entries.push_back(parse_expression(spec.matrix_rows[i][j], symbols));
            } catch (const ParseError& e) {
                throw InputError("entry (" + std::to_string(i) + "," + std::to_string(j) +
                                 "): " + e.what());
            }
        }
    }

    return MatrixFunction(static_cast<int>(dim), std::move(entries), anchor_from(spec),
                          std::move(tower_seed));
}

double anchor_from(const ProblemSpec& spec) {
    auto it = spec.options.find("anchor");
    if (it == spec.options.end()) return 0.0;
    try {
        const Complex a = parse_complex_literal(it->second);
        if (a.imag() != 0.0)
            throw InputError("anchor must lie on the real axis");
        return a.real();
    } catch (const InputError&) {
        throw;
    } catch (const Error& e) {
        throw InputError(std::string("bad anchor: ") + e.what());
    }
}

ClassifyConfig build_config(const ProblemSpec& spec) {
    ClassifyConfig cfg;
    for (const auto& [key, value] : spec.options) {
        try {
            if (key == "anchor") {
                continue;  // consumed by build_matrix
            } else if (key == "tol") {
                cfg.tol = std::stod(value);
            } else if (key == "samples") {
                cfg.samples = std::stoi(value);
            } else if (key == "seed") {
                cfg.seed = std::stoull(value);
            } else if (key == "max_degree") {
                const std::size_t comma = value.find(',');
                if (comma == std::string::npos) {
                    cfg.recon.max_num_degree = std::stoi(value);
                    cfg.recon.max_den_degree = cfg.recon.max_num_degree;
                } else {
                    cfg.recon.max_num_degree = std::stoi(value.substr(0, comma));
                    cfg.recon.max_den_degree = std::stoi(value.substr(comma + 1));
                }
            } else if (key == "probe") {
                if (value == "ones") cfg.symmetrizer_probe_ones = true;
                else if (value == "random") cfg.symmetrizer_probe_ones = false;
                else throw InputError("probe must be 'ones' or 'random'");
            } else {
                throw InputError("unknown option '" + key + "'");
            }
        } catch (const InputError&) {
            throw;
        } catch (const std::exception&) {
            throw InputError("bad value for option '" + key + "': " + value);
        }
    }
    if (cfg.samples < 1 || cfg.samples > 100000)
        throw InputError("samples out of range");
    if (!(cfg.tol > 0.0) || cfg.tol >= 1.0) throw InputError("tol out of range");
    if (cfg.recon.max_num_degree < 0 || cfg.recon.max_num_degree > 64 ||
        cfg.recon.max_den_degree < 0 || cfg.recon.max_den_degree > 64)
        throw InputError("max_degree out of range");
    return cfg;
}

} // namespace wh
