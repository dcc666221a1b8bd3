#include "gqnet/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>
#include <vector>

namespace gqnet {

double parse_finite_double(const std::string& token, const std::string& context) {
    std::size_t pos = 0;
    double v = 0.0;
    try {
        v = std::stod(token, &pos);
    } catch (const std::exception&) {
        throw ParseError(context + ": cannot parse '" + token + "' as a number");
    }
    if (pos != token.size())
        throw ParseError(context + ": trailing characters in '" + token + "'");
    if (!std::isfinite(v)) throw ParseError(context + ": non-finite value '" + token + "'");
    return v;
}

namespace {

std::vector<std::string> split_fields(const std::string& line) {
    const bool comma = line.find(',') != std::string::npos;
    std::vector<std::string> out;
    std::string cur;
    auto flush = [&] {
        // trim surrounding whitespace
        const auto a = cur.find_first_not_of(" \t\r");
        if (a == std::string::npos) {
            cur.clear();
            return;
        }
        const auto b = cur.find_last_not_of(" \t\r");
        out.push_back(cur.substr(a, b - a + 1));
        cur.clear();
    };
    for (char ch : line) {
        if ((comma && ch == ',') || (!comma && (ch == ' ' || ch == '\t'))) {
            if (comma || !cur.empty()) flush();
        } else {
            cur += ch;
        }
    }
    flush();
    return out;
}

}  // namespace

Dataset read_dataset(const std::string& path, int groups_override) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open dataset file '" + path + "'");

    int header_g = 0, header_p = 0;
    std::vector<int> groupmap;
    std::vector<std::vector<double>> rows;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string ctx = path + ":" + std::to_string(lineno);
        if (line.empty() || line.find_first_not_of(" \t\r") == std::string::npos) continue;
        if (line[0] == '#') {
            if (line.rfind("#groups:", 0) == 0) {
                std::istringstream hs(line.substr(8));
                if (!(hs >> header_g >> header_p) || header_g < 1 || header_p < 1)
                    throw ParseError(ctx + ": malformed '#groups: g p' header");
            } else if (line.rfind("#groupmap:", 0) == 0) {
                std::istringstream hs(line.substr(10));
                int id;
                while (hs >> id) groupmap.push_back(id);
                if (groupmap.empty()) throw ParseError(ctx + ": empty '#groupmap:' header");
            }
            continue;
        }
        const auto fields = split_fields(line);
        if (fields.size() < 2)
            throw ParseError(ctx + ": need a response and at least one design column");
        std::vector<double> row;
        row.reserve(fields.size());
        for (const auto& f : fields) row.push_back(parse_finite_double(f, ctx));
        if (!rows.empty() && row.size() != rows.front().size())
            throw ParseError(ctx + ": row has " + std::to_string(row.size()) +
                             " fields, expected " + std::to_string(rows.front().size()));
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw ParseError(path + ": no data rows");

    const int n = static_cast<int>(rows.size());
    const int cols = static_cast<int>(rows.front().size()) - 1;
    int g, p;
    if (groups_override > 0) {
        g = groups_override;
        if (cols % g != 0)
            throw ParseError(path + ": " + std::to_string(cols) +
                             " design columns not divisible into " + std::to_string(g) + " groups");
        p = cols / g;
    } else if (!groupmap.empty()) {
        if (static_cast<int>(groupmap.size()) != cols)
            throw ParseError(path + ": groupmap covers " + std::to_string(groupmap.size()) +
                             " columns, dataset has " + std::to_string(cols));
        // Require contiguous equal-sized groups numbered from the first id.
        g = 0;
        p = 0;
        int run = 1;
        for (int k = 1; k < cols; ++k) {
            if (groupmap[k] == groupmap[k - 1]) {
                ++run;
            } else {
                if (p == 0)
                    p = run;
                else if (run != p)
                    throw ParseError(path + ": groupmap groups must have equal sizes");
                run = 1;
                ++g;
            }
        }
        if (p == 0) p = run;
        if (run != p) throw ParseError(path + ": groupmap groups must have equal sizes");
        ++g;
        for (int k = 0; k < cols; ++k)
            if (groupmap[k] != groupmap[k / p * p])
                throw ParseError(path + ": groupmap groups must be contiguous");
    } else if (header_g > 0) {
        g = header_g;
        p = header_p;
        if (g * p != cols)
            throw ParseError(path + ": '#groups: " + std::to_string(g) + " " + std::to_string(p) +
                             "' does not match " + std::to_string(cols) + " design columns");
    } else {
        g = cols;  // no structure given: every column its own group
        p = 1;
    }

    Eigen::VectorXd y(n);
    Eigen::MatrixXd X(n, cols);
    for (int i = 0; i < n; ++i) {
        y[i] = rows[i][0];
        for (int k = 0; k < cols; ++k) X(i, k) = rows[i][k + 1];
    }
    return Dataset{std::move(y), GroupedDesign::create(n, g, p, std::move(X))};
}

void write_coefficients(std::ostream& os, const GroupedCoefficients& beta) {
    char buf[40];
    for (int j = 0; j < beta.g; ++j) {
        os << "group " << j;
        for (int k = 0; k < beta.p; ++k) {
            std::snprintf(buf, sizeof(buf), "%.17g", beta.group(j)[k]);
            os << ' ' << buf;
        }
        os << '\n';
    }
}

GroupedCoefficients read_coefficients(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open coefficient file '" + path + "'");
    std::vector<std::vector<double>> groups;
    std::string line;
    int lineno = 0;
    int p = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string ctx = path + ":" + std::to_string(lineno);
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ls(line);
        std::string tag;
        int j;
        if (!(ls >> tag >> j) || tag != "group")
            throw ParseError(ctx + ": expected 'group <j> <values...>'");
        if (j != static_cast<int>(groups.size()))
            throw ParseError(ctx + ": group indexes must be 0,1,2,... in order");
        std::vector<double> vals;
        std::string tok;
        while (ls >> tok) vals.push_back(parse_finite_double(tok, ctx));
        if (vals.empty()) throw ParseError(ctx + ": group line has no values");
        if (p == 0)
            p = static_cast<int>(vals.size());
        else if (static_cast<int>(vals.size()) != p)
            throw ParseError(ctx + ": inconsistent group size");
        groups.push_back(std::move(vals));
    }
    if (groups.empty()) throw ParseError(path + ": no coefficient groups");
    const int g = static_cast<int>(groups.size());
    Eigen::VectorXd flat(static_cast<Eigen::Index>(g) * p);
    for (int j = 0; j < g; ++j)
        for (int k = 0; k < p; ++k) flat[static_cast<Eigen::Index>(j) * p + k] = groups[j][k];
    return GroupedCoefficients::from_flat(g, p, std::move(flat));
}

SimulationScenario read_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open scenario file '" + path + "'");
    SimulationScenario sc;
    std::string beta_spec = "p2";
    bool have_sigma = false;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string ctx = path + ":" + std::to_string(lineno);
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ParseError(ctx + ": expected 'key = value'");
        auto trim = [](std::string s) {
            const auto a = s.find_first_not_of(" \t\r");
            const auto b = s.find_last_not_of(" \t\r");
            return (a == std::string::npos) ? std::string() : s.substr(a, b - a + 1);
        };
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key == "n") {
            sc.n = static_cast<int>(parse_finite_double(value, ctx));
        } else if (key == "g") {
            sc.g = static_cast<int>(parse_finite_double(value, ctx));
        } else if (key == "p") {
            sc.p = static_cast<int>(parse_finite_double(value, ctx));
        } else if (key == "error") {
            if (value == "normal")
                sc.error_law.kind = ErrorLaw::Kind::normal;
            else if (value == "cauchy")
                sc.error_law.kind = ErrorLaw::Kind::cauchy;
            else
                throw ParseError(ctx + ": error must be 'normal' or 'cauchy', got '" + value + "'");
        } else if (key == "sigma") {
            sc.error_law.sigma = parse_finite_double(value, ctx);
            have_sigma = true;
        } else if (key == "tau") {
            sc.tau = parse_finite_double(value, ctx);
        } else if (key == "reps") {
            sc.replications = static_cast<int>(parse_finite_double(value, ctx));
        } else if (key == "seed") {
            sc.base_seed = static_cast<std::uint64_t>(std::stoull(value));
        } else if (key == "beta") {
            beta_spec = value;
        } else if (key == "sn") {
            if (value != "auto") sc.sn_override = parse_finite_double(value, ctx);
        } else {
            throw ParseError(ctx + ": unknown scenario key '" + key + "'");
        }
    }
    (void)have_sigma;

    if (beta_spec == "p1" || beta_spec == "p2" || beta_spec == "p5") {
        sc.true_beta = beta_preset(beta_spec, sc.g);
        sc.p = sc.true_beta.p;
    } else {
        std::vector<double> vals;
        std::istringstream bs(beta_spec);
        std::string tok;
        while (std::getline(bs, tok, ',')) vals.push_back(parse_finite_double(tok, path + ": beta"));
        if (static_cast<int>(vals.size()) != sc.g * sc.p)
            throw ParseError(path + ": beta list has " + std::to_string(vals.size()) +
                             " values, expected g*p = " + std::to_string(sc.g * sc.p));
        Eigen::VectorXd flat(static_cast<Eigen::Index>(sc.g) * sc.p);
        for (std::size_t i = 0; i < vals.size(); ++i) flat[static_cast<Eigen::Index>(i)] = vals[i];
        sc.true_beta = GroupedCoefficients::from_flat(sc.g, sc.p, std::move(flat));
    }
    sc.validate();
    return sc;
}

}  // namespace gqnet
