#include "repvar/io.hpp"

#include "repvar/error.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

namespace repvar::io {

using nlohmann::json;

namespace {

std::vector<std::string> split_csv_line(const std::string& line, std::size_t line_no) {
    std::vector<std::string> fields;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cur += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cur += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(std::move(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    if (quoted) throw Error(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": unterminated quote");
    fields.push_back(std::move(cur));
    return fields;
}

std::string trim(std::string s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

double parse_real(const std::string& text, const char* field, std::size_t line_no) {
    double value = 0.0;
    const char* begin = text.data();
    const char* end = text.data() + text.size();
    if (begin != end && *begin == '+') ++begin;
    const auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc() || ptr != end || text.empty() || !std::isfinite(value)) {
        throw Error(ErrorCode::ParseError,
                    "line " + std::to_string(line_no) + ": " + field + " '" + text + "' is not a finite number");
    }
    return value;
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

} // namespace

StratifiedSample parse_sample(std::istream& in) {
    std::string line;
    std::size_t line_no = 0;
    bool have_header = false;
    struct Pending {
        std::string label;
        std::optional<Observation> units[2];
    };
    std::vector<Pending> strata;
    std::map<std::string, std::size_t> index;

    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        auto fields = split_csv_line(line, line_no);
        for (auto& f : fields) f = trim(f);
        if (!have_header) {
            if (fields != std::vector<std::string>{"stratum", "psu", "weight", "y"}) {
                throw Error(ErrorCode::ParseError,
                            "line " + std::to_string(line_no) + ": expected header 'stratum,psu,weight,y'");
            }
            have_header = true;
            continue;
        }
        if (fields.size() != 4) {
            throw Error(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": expected 4 fields, got " +
                                                   std::to_string(fields.size()));
        }
        const std::string& label = fields[0];
        int psu = 0;
        {
            const auto& t = fields[1];
            const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), psu);
            if (ec != std::errc() || ptr != t.data() + t.size() || (psu != 1 && psu != 2)) {
                throw Error(ErrorCode::ParseError,
                            "line " + std::to_string(line_no) + ": psu '" + t + "' must be 1 or 2");
            }
        }
        const double weight = parse_real(fields[2], "weight", line_no);
        const double y = parse_real(fields[3], "y", line_no);
        if (!(weight > 0.0)) {
            throw Error(ErrorCode::NonPositiveWeight,
                        "line " + std::to_string(line_no) + ": weight " + fields[2] + " must be positive");
        }
        auto [it, inserted] = index.try_emplace(label, strata.size());
        if (inserted) strata.push_back({label, {}});
        auto& slot = strata[it->second].units[psu - 1];
        if (slot) {
            throw Error(ErrorCode::DuplicatePsu, "line " + std::to_string(line_no) + ": stratum '" + label +
                                                     "' already has psu " + std::to_string(psu));
        }
        slot = Observation{weight, y};
    }
    if (!have_header) throw Error(ErrorCode::ParseError, "empty input: missing header");
    if (strata.empty()) throw Error(ErrorCode::ParseError, "no observations after the header");

    std::vector<Stratum> out;
    out.reserve(strata.size());
    for (const auto& p : strata) {
        if (!p.units[0] || !p.units[1]) {
            throw Error(ErrorCode::MissingPair, "stratum '" + p.label + "' lacks psu " + (p.units[0] ? "2" : "1"));
        }
        out.emplace_back(p.label, *p.units[0], *p.units[1]);
    }
    return StratifiedSample(std::move(out));
}

StratifiedSample parse_sample(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::IoError, "cannot open '" + path.string() + "'");
    return parse_sample(in);
}

std::string format_double(double x) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, ptr);
}

std::string format_12g(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", x);
    return buf;
}

void write_replicate_weights(std::ostream& out, const StratifiedSample& sample, const ReplicateWeightTable& table) {
    if (table.num_observations() != sample.num_observations()) {
        throw Error(ErrorCode::DimensionMismatch, "replicate table does not match the sample");
    }
    out << "stratum,psu,weight";
    for (std::size_t r = 0; r < table.num_replicates(); ++r) out << ",rw" << (r + 1);
    out << '\n';
    for (std::size_t k = 0; k < sample.num_observations(); ++k) {
        out << csv_field(sample.stratum(k / 2).label()) << ',' << (k % 2 + 1) << ','
            << format_double(table.full_weights[k]);
        for (std::size_t r = 0; r < table.num_replicates(); ++r) out << ',' << format_double(table.weights(r, k));
        out << '\n';
    }
}

void write_sign_matrix(std::ostream& out, const SignMatrix& M) {
    for (std::size_t r = 0; r < M.rows(); ++r) {
        for (std::size_t c = 0; c < M.cols(); ++c) out << (c ? "," : "") << M(r, c);
        out << '\n';
    }
}

// --- variance report -------------------------------------------------------

json to_json(const VarianceReport& r) {
    json schemes = json::array();
    for (const auto& s : r.schemes) {
        schemes.push_back({{"scheme", to_string(s.scheme.kind)},
                           {"epsilon", s.scheme.epsilon},
                           {"num_replicates", s.num_replicates},
                           {"hadamard_order", s.hadamard_order ? json(s.hadamard_order) : json(nullptr)},
                           {"via_replicates", s.via_replicates},
                           {"via_contrasts", s.via_contrasts}});
    }
    json dof = nullptr;
    if (r.dof) {
        dof = {{"naive", r.dof->naive},
               {"corrected", r.dof->corrected},
               {"corrected_clamped", r.dof->corrected_clamped},
               {"basis", to_string(r.dof->basis)},
               {"rule", to_string(r.dof->rule)},
               {"cap_at_h", r.dof->cap_at_h},
               {"used", r.dof->used ? json(*r.dof->used) : json(nullptr)}};
    }
    return {{"schema_version", r.schema_version},
            {"total", r.total},
            {"num_strata", r.num_strata},
            {"strata", r.stratum_labels},
            {"contrasts", r.contrasts},
            {"variance", r.variance},
            {"schemes", schemes},
            {"dof", dof},
            {"interval",
             {{"level", r.interval.level},
              {"lower", r.interval.lower},
              {"upper", r.interval.upper},
              {"half_width", r.interval.half_width}}},
            {"degenerate", r.degenerate},
            {"warnings", r.warnings},
            {"assumptions", r.assumptions}};
}

VarianceReport variance_report_from_json(const json& j) {
    try {
        VarianceReport r;
        r.schema_version = j.at("schema_version").get<int>();
        if (r.schema_version != kReportSchemaVersion) {
            throw Error(ErrorCode::ParseError, "unsupported schema_version " + std::to_string(r.schema_version));
        }
        r.total = j.at("total").get<double>();
        r.num_strata = j.at("num_strata").get<std::size_t>();
        r.stratum_labels = j.at("strata").get<std::vector<std::string>>();
        r.contrasts = j.at("contrasts").get<std::vector<double>>();
        r.variance = j.at("variance").get<double>();
        for (const auto& s : j.at("schemes")) {
            SchemeVariance sv;
            sv.scheme.kind = parse_scheme_kind(s.at("scheme").get<std::string>());
            sv.scheme.epsilon = s.at("epsilon").get<double>();
            sv.num_replicates = s.at("num_replicates").get<std::size_t>();
            if (!s.at("hadamard_order").is_null()) {
                sv.hadamard_order = s.at("hadamard_order").get<std::size_t>();
                sv.scheme.hadamard_order = sv.hadamard_order;
            }
            sv.via_replicates = s.at("via_replicates").get<double>();
            sv.via_contrasts = s.at("via_contrasts").get<double>();
            r.schemes.push_back(sv);
        }
        if (const auto& d = j.at("dof"); !d.is_null()) {
            ReportDof rd;
            rd.naive = d.at("naive").get<double>();
            rd.corrected = d.at("corrected").get<double>();
            rd.corrected_clamped = d.at("corrected_clamped").get<double>();
            rd.basis = d.at("basis").get<std::string>() == "contrasts" ? DofBasis::Contrasts : DofBasis::JkReplicates;
            rd.rule = parse_dof_rule(d.at("rule").get<std::string>());
            rd.cap_at_h = d.at("cap_at_h").get<bool>();
            if (!d.at("used").is_null()) rd.used = d.at("used").get<double>();
            r.dof = rd;
        }
        const auto& ci = j.at("interval");
        r.interval.level = ci.at("level").get<double>();
        r.interval.lower = ci.at("lower").get<double>();
        r.interval.upper = ci.at("upper").get<double>();
        r.interval.half_width = ci.at("half_width").get<double>();
        r.degenerate = j.at("degenerate").get<bool>();
        r.warnings = j.at("warnings").get<std::vector<std::string>>();
        r.assumptions = j.at("assumptions").get<std::vector<std::string>>();
        return r;
    } catch (const json::exception& e) {
        throw Error(ErrorCode::ParseError, std::string("variance report: ") + e.what());
    }
}

std::string summarize(const VarianceReport& r) {
    std::ostringstream os;
    os << "strata: " << r.num_strata << '\n';
    os << "total: " << format_12g(r.total) << '\n';
    os << "variance: " << format_12g(r.variance) << '\n';
    for (const auto& s : r.schemes) {
        os << "  " << to_string(s.scheme.kind) << " (epsilon " << format_12g(s.scheme.epsilon) << ", "
           << s.num_replicates << " replicates";
        if (s.hadamard_order) os << ", hadamard order " << s.hadamard_order;
        os << "): via replicates " << format_12g(s.via_replicates) << '\n';
    }
    if (r.dof) {
        os << "dof: naive " << format_12g(r.dof->naive) << ", corrected " << format_12g(r.dof->corrected)
           << ", used " << (r.dof->used ? format_12g(*r.dof->used) : std::string("normal")) << " ("
           << to_string(r.dof->rule) << ")\n";
    } else {
        os << "dof: undefined\n";
    }
    os << format_12g(100.0 * r.interval.level) << "% interval: [" << format_12g(r.interval.lower) << ", "
       << format_12g(r.interval.upper) << "]\n";
    for (const auto& w : r.warnings) os << "warning: " << w << '\n';
    return os.str();
}

// --- simulation config and report ------------------------------------------

namespace {

[[noreturn]] void config_error(const std::string& pointer, const std::string& msg) {
    throw Error(ErrorCode::ConfigError, pointer + ": " + msg);
}

const json& require(const json& j, const std::string& key, const std::string& pointer) {
    if (!j.is_object() || !j.contains(key)) config_error(pointer + "/" + key, "missing field");
    return j.at(key);
}

double get_number(const json& j, const std::string& pointer) {
    if (!j.is_number()) config_error(pointer, "expected a number");
    return j.get<double>();
}

std::uint64_t get_unsigned(const json& j, const std::string& pointer) {
    if (!j.is_number_unsigned()) config_error(pointer, "expected a non-negative integer");
    return j.get<std::uint64_t>();
}

std::vector<double> get_numbers(const json& j, const std::string& pointer) {
    if (!j.is_array()) config_error(pointer, "expected an array of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < j.size(); ++i) out.push_back(get_number(j[i], pointer + "/" + std::to_string(i)));
    return out;
}

sim::SigmaProfile parse_profile(const json& j, const std::string& pointer) {
    if (!j.is_object()) config_error(pointer, "expected an object");
    const auto& type = require(j, "type", pointer);
    if (!type.is_string()) config_error(pointer + "/type", "expected a string");
    const auto t = type.get<std::string>();
    if (t == "equal") return sim::EqualSigma{get_number(require(j, "sigma", pointer), pointer + "/sigma")};
    if (t == "linear") {
        return sim::LinearSigma{get_number(require(j, "min", pointer), pointer + "/min"),
                                get_number(require(j, "max", pointer), pointer + "/max")};
    }
    if (t == "one_dominant") return sim::OneDominantSigma{get_number(require(j, "ratio", pointer), pointer + "/ratio")};
    if (t == "custom") return sim::CustomSigma{get_numbers(require(j, "sigmas", pointer), pointer + "/sigmas")};
    config_error(pointer + "/type", "unknown profile '" + t + "' (equal, linear, one_dominant, custom)");
}

json matrix_json(const Matrix<double>& m) {
    json rows = json::array();
    for (std::size_t r = 0; r < m.rows(); ++r) {
        rows.push_back(std::vector<double>(m.row(r).begin(), m.row(r).end()));
    }
    return rows;
}

} // namespace

sim::SimulationConfig parse_simulation_config(const json& j) {
    if (!j.is_object()) config_error("", "expected a JSON object");
    sim::SimulationConfig c;
    c.num_strata = get_unsigned(require(j, "strata", ""), "/strata");
    c.sigma_profile = parse_profile(require(j, "sigma_profile", ""), "/sigma_profile");
    c.n_reps = get_unsigned(require(j, "n_reps", ""), "/n_reps");
    c.seed = get_unsigned(require(j, "seed", ""), "/seed");
    if (j.contains("level")) c.level = get_number(j["level"], "/level");
    if (j.contains("means")) c.means = get_numbers(j["means"], "/means");
    if (j.contains("threads")) c.threads = static_cast<unsigned>(get_unsigned(j["threads"], "/threads"));
    if (j.contains("cap_at_h")) {
        if (!j["cap_at_h"].is_boolean()) config_error("/cap_at_h", "expected a boolean");
        c.cap_at_h = j["cap_at_h"].get<bool>();
    }
    if (j.contains("scheme")) {
        const auto& s = j["scheme"];
        const auto& kind = require(s, "kind", "/scheme");
        if (!kind.is_string()) config_error("/scheme/kind", "expected a string");
        std::optional<std::size_t> order;
        if (s.contains("hadamard_order")) order = get_unsigned(s["hadamard_order"], "/scheme/hadamard_order");
        try {
            const auto k = parse_scheme_kind(kind.get<std::string>());
            const double eps = s.contains("epsilon") ? get_number(s["epsilon"], "/scheme/epsilon")
                                                     : (k == SchemeKind::FayBrr || k == SchemeKind::FayJk ? kDefaultFayEpsilon : 1.0);
            c.scheme = SchemeSpec{k, eps, order};
            c.scheme.validate();
        } catch (const Error& e) {
            if (e.code() == ErrorCode::ConfigError) throw;
            config_error("/scheme", e.what());
        }
    }
    if (j.contains("dof_rules")) {
        const auto& rules = j["dof_rules"];
        if (!rules.is_array()) config_error("/dof_rules", "expected an array of strings");
        c.dof_rules.clear();
        for (std::size_t i = 0; i < rules.size(); ++i) {
            const std::string ptr = "/dof_rules/" + std::to_string(i);
            if (!rules[i].is_string()) config_error(ptr, "expected a string");
            try {
                c.dof_rules.push_back(parse_dof_rule(rules[i].get<std::string>()));
            } catch (const Error& e) {
                config_error(ptr, e.what());
            }
        }
    }
    c.validate();
    return c;
}

sim::SimulationConfig load_simulation_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::IoError, "cannot open '" + path.string() + "'");
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw Error(ErrorCode::ConfigError, std::string("malformed JSON: ") + e.what());
    }
    return parse_simulation_config(j);
}

json to_json(const sim::SimulationReport& r) {
    json coverage = json::array();
    for (const auto& c : r.coverage) {
        coverage.push_back({{"rule", to_string(c.rule)},
                            {"covered", c.covered},
                            {"n", c.n},
                            {"coverage", c.coverage},
                            {"mc_se", c.mc_se},
                            {"mean_dof", c.mean_dof},
                            {"sd_dof", c.sd_dof}});
    }
    json cov = nullptr;
    if (r.deviation_covariance) {
        cov = {{"empirical", matrix_json(r.deviation_covariance->empirical)},
               {"theoretical", matrix_json(r.deviation_covariance->theoretical)},
               {"mc_se", matrix_json(r.deviation_covariance->mc_se)},
               {"max_abs_z", r.deviation_covariance->max_abs_z}};
    }
    return {{"schema_version", kReportSchemaVersion},
            {"n_reps", r.n_reps},
            {"strata", r.num_strata},
            {"num_replicates", r.num_replicates},
            {"level", r.level},
            {"seed", r.seed},
            {"scheme",
             {{"kind", to_string(r.scheme.kind)},
              {"epsilon", r.scheme.epsilon},
              {"hadamard_order", r.scheme.hadamard_order ? json(*r.scheme.hadamard_order) : json(nullptr)}}},
            {"true_total", r.true_total},
            {"sigmas", r.sigmas},
            {"coverage", coverage},
            {"n_degenerate", r.n_degenerate},
            {"variance",
             {{"mean", r.mean_variance},
              {"expected", r.expected_variance},
              {"var", r.var_variance},
              {"var_normal_theory", r.var_variance_normal}}},
            {"dof", {{"mean_naive", r.mean_naive_dof}, {"mean_corrected", r.mean_corrected_dof}}},
            {"deviation_covariance", cov}};
}

std::string summarize(const sim::SimulationReport& r) {
    std::ostringstream os;
    os << "reps: " << r.n_reps << ", strata: " << r.num_strata << ", scheme: " << to_string(r.scheme.kind)
       << " (" << r.num_replicates << " replicates), seed " << r.seed << '\n';
    for (const auto& c : r.coverage) {
        os << "  coverage[" << to_string(c.rule) << "] = " << format_12g(c.coverage) << " +/- "
           << format_12g(c.mc_se);
        if (c.rule != DofRule::Normal) os << "  mean dof " << format_12g(c.mean_dof);
        os << '\n';
    }
    os << "  mean variance " << format_12g(r.mean_variance) << " (expected " << format_12g(r.expected_variance)
       << "), Var(V) " << format_12g(r.var_variance) << " (normal theory " << format_12g(r.var_variance_normal)
       << ")\n";
    if (r.deviation_covariance) {
        os << "  deviation covariance max |z| " << format_12g(r.deviation_covariance->max_abs_z) << '\n';
    }
    os << "  elapsed " << format_12g(r.elapsed_seconds) << " s on " << r.threads_used << " threads\n";
    return os.str();
}

} // namespace repvar::io
