#include "chanest/cli.hpp"

#include <unistd.h>

#include <CLI11.hpp>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <ostream>
#include <sstream>

#include "chanest/canonical.hpp"
#include "chanest/errors.hpp"
#include "chanest/estimate.hpp"
#include "chanest/fisher.hpp"

namespace chanest::cli {

namespace {

using nlohmann::json;

const char* const kCommands[] = {"bound", "distance-curve", "optimality-check", "simulate", "channels"};

std::size_t parse_index(const std::string& text, const std::string& descriptor) {
    std::size_t used = 0;
    unsigned long long v = 0;
    try {
        v = std::stoull(text, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used == 0 || used != text.size()) throw ValidationError("bad index in '" + descriptor + "'");
    return static_cast<std::size_t>(v);
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream in(s);
    while (std::getline(in, cur, sep)) out.push_back(cur);
    if (!s.empty() && s.back() == sep) out.emplace_back();
    return out;
}

double parse_double(const std::string& text, const std::string& descriptor) {
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(text, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used == 0 || used != text.size()) throw ValidationError("bad number '" + text + "' in '" + descriptor + "'");
    return v;
}

cx json_entry(const json& j) {
    if (j.is_number()) return j.get<double>();
    if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number()) {
        return {j[0].get<double>(), j[1].get<double>()};
    }
    throw ValidationError("POVM file: matrix entries must be numbers or [re, im] pairs");
}

Povm povm_from_file(const std::string& path, std::size_t dim) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open POVM file '" + path + "'");
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::exception& e) {
        throw ValidationError("POVM file '" + path + "': " + e.what());
    }
    if (!doc.is_object() || !doc.contains("effects") || !doc["effects"].is_array()) {
        throw ValidationError("POVM file '" + path + "' needs an \"effects\" array");
    }
    std::vector<ComplexMatrix> effects;
    for (const auto& m : doc["effects"]) {
        if (!m.is_array() || m.size() != dim) throw ValidationError("POVM file: each effect must have " + std::to_string(dim) + " rows");
        ComplexMatrix e(dim, dim);
        for (std::size_t r = 0; r < dim; ++r) {
            if (!m[r].is_array() || m[r].size() != dim) throw ValidationError("POVM file: ragged effect matrix");
            for (std::size_t c = 0; c < dim; ++c) e(r, c) = json_entry(m[r][c]);
        }
        effects.push_back(std::move(e));
    }
    std::vector<std::string> labels;
    if (doc.contains("labels")) {
        try {
            labels = doc["labels"].get<std::vector<std::string>>();
        } catch (const json::exception&) {
            throw ValidationError("POVM file: labels must be strings");
        }
    }
    return Povm(std::move(effects), std::move(labels));
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

json number_or_null(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

std::string resolved_input(const RunConfig& c, std::size_t dim) {
    return c.input.empty() ? default_input(c, dim) : c.input;
}

std::string resolved_povm(const RunConfig& c) { return c.povm.empty() ? default_povm(c) : c.povm; }

std::string resolved_format(const RunConfig& c) {
    if (!c.format.empty()) return c.format;
    if (c.command == "optimality-check" || c.command == "simulate") return "json";
    return "csv";
}

Povm povm_at(const RunConfig& c, const ParamKrausFamily& family, const QuantumState& in, double theta) {
    const std::string d = resolved_povm(c);
    if (d == "eigenframe") return quasiclassical_optimal_povm(canonical_decompose(family, theta, in)).povm;
    return parse_povm(d, family.dim());
}

std::string render_bound(const RunConfig& c) {
    const ParamKrausFamily family = make_family(c);
    const QuantumState in = parse_input(resolved_input(c, family.dim()), family.dim());
    if (c.decomposition != "canonical" && c.decomposition != "raw") {
        throw ValidationError("decomposition must be canonical or raw");
    }
    const auto grid = theta_grid(c, family.domain());
    std::vector<double> bounds, slds;
    for (double t : grid) {
        bounds.push_back(c.decomposition == "raw" ? kraus_bound(family, t, in)
                                                  : kraus_bound(canonical_decompose(family, t, in)));
        slds.push_back(sld_fisher(family, t, in));
    }
    if (resolved_format(c) == "json") {
        json rows = json::array();
        for (std::size_t i = 0; i < grid.size(); ++i) {
            rows.push_back({{"theta", grid[i]}, {"kraus_bound", bounds[i]}, {"sld_fisher", slds[i]}});
        }
        return json{{"channel", family.label()}, {"decomposition", c.decomposition}, {"rows", rows}}.dump(2) + "\n";
    }
    std::string out = "theta,kraus_bound,sld_fisher\n";
    for (std::size_t i = 0; i < grid.size(); ++i) {
        out += format_number(grid[i]) + "," + format_number(bounds[i]) + "," + format_number(slds[i]) + "\n";
    }
    return out;
}

std::string render_distance(const RunConfig& c) {
    if (c.points < 3) throw ValidationError("distance-curve needs points >= 3");
    const ParamKrausFamily family = make_family(c);
    const std::string input = resolved_input(c, family.dim());
    const QuantumState in = parse_input(input, family.dim());
    const auto grid = theta_grid(c, family.domain());
    const auto frames = smooth_frame_curve(family, grid, in);
    const DistanceCurve curve = statistical_distance_eigencoords(frames, family.label() + " | " + input);
    if (resolved_format(c) == "json") {
        json closed = json::array();
        for (double t : curve.thetas) {
            const auto cf = closed_form(c, t);
            closed.push_back(cf ? json(*cf) : json(nullptr));
        }
        return json{{"label", curve.label},
                    {"thetas", curve.thetas},
                    {"bound_values", curve.bound_values},
                    {"eigencoord_values", curve.eigencoord_values},
                    {"closed_form", closed}}
                   .dump(2) +
               "\n";
    }
    std::string out = "theta,bound,eigencoord,closed_form\n";
    for (std::size_t i = 0; i < curve.thetas.size(); ++i) {
        const auto cf = closed_form(c, curve.thetas[i]);
        out += format_number(curve.thetas[i]) + "," + format_number(curve.bound_values[i]) + "," +
               format_number(curve.eigencoord_values[i]) + "," + (cf ? format_number(*cf) : "") + "\n";
    }
    return out;
}

std::string render_optimality(const RunConfig& c) {
    if (resolved_format(c) != "json") throw ValidationError("optimality-check writes JSON only");
    const ParamKrausFamily family = make_family(c);
    const std::string input = resolved_input(c, family.dim());
    const QuantumState in = parse_input(input, family.dim());
    json reports = json::array();
    for (double t : theta_grid(c, family.domain())) {
        const CanonicalFrame frame = canonical_decompose(family, t, in);
        const Povm povm = povm_at(c, family, in, t);
        const OptimalityReport r = optimality_check(povm, frame, in);
        json residuals = json::array();
        for (double x : r.residuals) residuals.push_back(number_or_null(x));
        reports.push_back({{"theta", r.theta},
                           {"labels", r.labels},
                           {"lambdas", r.lambdas},
                           {"residuals", residuals},
                           {"max_residual", number_or_null(r.max_residual)},
                           {"satisfied", r.satisfied}});
    }
    return json{{"channel", family.label()}, {"input", input}, {"povm", resolved_povm(c)}, {"reports", reports}}
               .dump(2) +
           "\n";
}

std::string render_simulate(const RunConfig& c) {
    const ParamKrausFamily family = make_family(c);
    const QuantumState in = parse_input(resolved_input(c, family.dim()), family.dim());
    const std::optional<double> theta = c.theta ? c.theta : c.theta_start;
    if (!theta) throw ValidationError("simulate needs theta");
    const Povm povm = povm_at(c, family, in, *theta);
    const EstimationReport r = crlb_experiment(povm, family, *theta, in, c.shots, c.trials, c.seed, c.threads);
    if (resolved_format(c) == "csv") {
        std::string out = "estimate\n";
        for (double x : r.estimates) out += format_number(x) + "\n";
        return out;
    }
    return json{{"n_shots", r.n_shots},
                {"n_trials", r.n_trials},
                {"true_theta", r.true_theta},
                {"seed", r.seed},
                {"fisher", r.fisher},
                {"estimates", r.estimates},
                {"empirical_variance", r.empirical_variance},
                {"crlb", r.crlb},
                {"ratio", r.ratio},
                {"bias", r.bias}}
               .dump(2) +
           "\n";
}

std::string render_channels(const RunConfig& c) {
    const auto& catalog = builtin_catalog();
    if (resolved_format(c) == "json") {
        json list = json::array();
        for (const auto& b : catalog) {
            list.push_back({{"name", b.name}, {"parameter", b.parameter}, {"domain", b.domain}, {"kraus_form", b.kraus_form}});
        }
        return list.dump(2) + "\n";
    }
    std::string out = "name,parameter,domain,kraus_form\n";
    for (const auto& b : catalog) {
        out += csv_field(b.name) + "," + csv_field(b.parameter) + "," + csv_field(b.domain) + "," +
               csv_field(b.kraus_form) + "\n";
    }
    return out;
}

const char* kind_of(const Error& e) {
    if (dynamic_cast<const DegeneracyError*>(&e)) return "degeneracy";
    if (dynamic_cast<const DivergentFisherError*>(&e)) return "divergent_fisher";
    if (dynamic_cast<const ValidationError*>(&e)) return "validation";
    return "numeric";
}

}  // namespace

std::string format_number(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

std::optional<RunConfig> parse_args(int argc, const char* const* argv, std::ostream& out) {
    RunConfig c;
    CLI::App app{"Fisher-information bounds and estimation experiments for one-parameter Kraus families", "chanest"};
    app.set_config("--config", "", "Flat key=value file; flags on the command line override it");
    app.allow_config_extras(CLI::config_extras_mode::error);
    // Descriptors such as amps:1,0;0,1 contain commas; keep config values whole.
    app.get_config_formatter_base()->arrayDelimiter('\x1f');

    std::size_t dim = 0, n_max = 0;
    double theta_start = 0.0, theta_stop = 0.0, theta = 0.0;
    app.add_option("command", c.command, "bound | distance-curve | optimality-check | simulate | channels")
        ->check(CLI::IsMember(std::vector<std::string>(std::begin(kCommands), std::end(kCommands))));
    app.add_option("--channel", c.channel, "Builtin channel name");
    app.add_option("--extension", c.extension, "none | identity | square")
        ->check(CLI::IsMember({"none", "identity", "square"}));
    auto* dim_opt = app.add_option("--dim", dim, "random-shift Hilbert dimension");
    auto* nmax_opt = app.add_option("--n_max", n_max, "damping Fock cutoff");
    app.add_option("--theta_max", c.theta_max, "random-shift domain end");
    app.add_option("--input", c.input, "basis:N | plus | minus | bell:K | amps:re,im;...");
    app.add_option("--povm", c.povm, "z-basis | x-basis | bell-basis | photon-number | position | eigenframe | file:PATH");
    app.add_option("--decomposition", c.decomposition, "bound: canonical | raw")
        ->check(CLI::IsMember({"canonical", "raw"}));
    auto* start_opt = app.add_option("--theta_start", theta_start, "First grid point");
    auto* stop_opt = app.add_option("--theta_stop", theta_stop, "Last grid point");
    app.add_option("--points", c.points, "Number of grid points");
    auto* theta_opt = app.add_option("--theta", theta, "simulate: true parameter");
    app.add_option("--shots", c.shots, "simulate: shots per trial");
    app.add_option("--trials", c.trials, "simulate: number of trials");
    app.add_option("--seed", c.seed, "simulate: master seed");
    app.add_option("--threads", c.threads, "simulate: worker threads (0 = hardware)");
    app.add_option("--out", c.out, "Output path (default: standard output)");
    app.add_option("--format", c.format, "csv | json")->check(CLI::IsMember({"csv", "json"}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return std::nullopt;
    } catch (const CLI::ParseError& e) {
        throw ValidationError(e.what());
    }
    if (c.command.empty()) throw ValidationError("no command given");
    if (dim_opt->count() > 0) c.dim = dim;
    if (nmax_opt->count() > 0) c.n_max = n_max;
    if (start_opt->count() > 0) c.theta_start = theta_start;
    if (stop_opt->count() > 0) c.theta_stop = theta_stop;
    if (theta_opt->count() > 0) c.theta = theta;
    return c;
}

ParamKrausFamily make_family(const RunConfig& c) {
    BuiltinParams params;
    params.dim = c.dim;
    params.n_max = c.n_max;
    params.theta_max = c.theta_max;
    ParamKrausFamily base = builtin(c.channel, params);
    if (c.extension == "identity") return extend_identity(base);
    if (c.extension == "square") return tensor_square(base);
    if (c.extension != "none") throw ValidationError("unknown extension '" + c.extension + "'");
    return base;
}

QuantumState parse_input(const std::string& descriptor, std::size_t dim) {
    const auto colon = descriptor.find(':');
    const std::string head = descriptor.substr(0, colon);
    const std::string arg = colon == std::string::npos ? "" : descriptor.substr(colon + 1);
    auto need_dim = [&](std::size_t want) {
        if (dim != want) {
            throw ValidationError("input '" + descriptor + "' has dimension " + std::to_string(want) +
                                  ", channel acts on " + std::to_string(dim));
        }
    };
    if (head == "plus" && arg.empty()) {
        need_dim(2);
        return QuantumState::plus();
    }
    if (head == "minus" && arg.empty()) {
        need_dim(2);
        return QuantumState::minus();
    }
    if (head == "basis") {
        const std::size_t i = parse_index(arg, descriptor);
        if (i >= dim) throw ValidationError("input '" + descriptor + "' is outside dimension " + std::to_string(dim));
        return QuantumState::basis(dim, i);
    }
    if (head == "bell") {
        need_dim(4);
        const std::size_t i = parse_index(arg, descriptor);
        if (i > 3) throw ValidationError("Bell index must be 0..3");
        return QuantumState::bell(i);
    }
    if (head == "amps") {
        Ket amps;
        for (const auto& pair : split(arg, ';')) {
            const auto parts = split(pair, ',');
            if (parts.size() != 2) throw ValidationError("amplitude '" + pair + "' must be re,im");
            amps.emplace_back(parse_double(parts[0], descriptor), parse_double(parts[1], descriptor));
        }
        need_dim(amps.size());
        return QuantumState::pure_normalized(std::move(amps));
    }
    throw ValidationError("unknown input descriptor '" + descriptor + "'");
}

std::string default_input(const RunConfig& c, std::size_t dim) {
    if (c.extension != "none") return dim == 4 ? "bell:0" : "basis:0";
    if (c.channel == "dephasing") return "plus";
    if (c.channel == "damping") return "basis:" + std::to_string(dim - 1);
    return "basis:0";
}

std::string default_povm(const RunConfig& c) {
    if (c.extension == "identity" && (c.channel == "depolarizing" || c.channel == "dephasing")) return "bell-basis";
    if (c.extension != "none") return "eigenframe";
    if (c.channel == "depolarizing" || c.channel == "depolarizing-canonical") return "z-basis";
    if (c.channel == "dephasing") return "x-basis";
    if (c.channel == "damping") return "photon-number";
    if (c.channel == "random-shift") return "position";
    return "eigenframe";
}

Povm parse_povm(const std::string& d, std::size_t dim) {
    if (d == "z-basis") return Povm::computational(dim);
    if (d == "photon-number") return Povm::computational(dim, "n");
    if (d == "position") return Povm::computational(dim, "x");
    if (d == "x-basis") {
        if (dim != 2) throw ValidationError("x-basis needs a qubit, channel acts on dimension " + std::to_string(dim));
        return Povm::x_basis();
    }
    if (d == "bell-basis") {
        if (dim != 4) throw ValidationError("bell-basis needs dimension 4, channel acts on " + std::to_string(dim));
        return Povm::bell_basis();
    }
    if (d.rfind("file:", 0) == 0) return povm_from_file(d.substr(5), dim);
    if (d == "eigenframe") throw ValidationError("eigenframe POVM depends on theta");
    throw ValidationError("unknown POVM descriptor '" + d + "'");
}

std::vector<double> theta_grid(const RunConfig& c, const ThetaDomain& domain) {
    if (!c.theta_start) throw ValidationError("theta_start is required");
    if (c.points == 0) throw ValidationError("points must be positive");
    const double a = *c.theta_start;
    const double b = c.theta_stop ? *c.theta_stop : a;
    const std::size_t points = c.theta_stop ? c.points : 1;
    if (points > 1 && !(b > a)) throw ValidationError("theta_stop must exceed theta_start");
    if (!std::isfinite(a) || !std::isfinite(b)) throw ValidationError("grid ends must be finite");
    const double inset = NumericSettings{}.domain_inset;
    std::vector<double> grid;
    for (std::size_t i = 0; i < points; ++i) {
        const double t = points == 1 ? a : a + (b - a) * static_cast<double>(i) / static_cast<double>(points - 1);
        if (t < domain.lo || t > domain.hi) {
            throw ValidationError("grid point " + format_number(t) + " is outside " + domain.describe());
        }
        const double inside = domain.clamp_inward(t, inset);
        if (!grid.empty() && !(inside > grid.back())) throw ValidationError("grid collapses after clamping to the domain");
        grid.push_back(inside);
    }
    return grid;
}

std::optional<double> closed_form(const RunConfig& c, double theta) {
    const std::size_t dim = make_family(c).dim();
    const std::string in = resolved_input(c, dim);
    const bool bell = in.rfind("bell:", 0) == 0;
    if (c.channel == "depolarizing" || c.channel == "depolarizing-canonical") {
        if (c.extension == "none") return 6.0 / (theta * (9.0 - 6.0 * theta));
        if (c.extension == "identity" && bell) return 1.0 / (theta * (1.0 - theta));
    }
    if (c.channel == "dephasing") {
        const bool equator = c.extension == "none" && (in == "plus" || in == "minus");
        if (equator || (c.extension == "identity" && bell)) return 4.0 / std::expm1(4.0 * theta);
    }
    if (c.channel == "damping" && c.extension == "none" && in.rfind("basis:", 0) == 0) {
        const double n = static_cast<double>(parse_index(in.substr(6), in));
        return n / std::expm1(theta);
    }
    if (c.channel == "random-shift" && c.extension == "none" && in == "basis:0") return 1.0 / theta;
    return std::nullopt;
}

std::string render(const RunConfig& c) {
    if (c.command == "bound") return render_bound(c);
    if (c.command == "distance-curve") return render_distance(c);
    if (c.command == "optimality-check") return render_optimality(c);
    if (c.command == "simulate") return render_simulate(c);
    if (c.command == "channels") return render_channels(c);
    throw ValidationError("unknown command '" + c.command + "'");
}

void write_atomically(const std::string& path, const std::string& text) {
    namespace fs = std::filesystem;
    const fs::path target(path);
    const fs::path tmp = target.string() + ".tmp-" + std::to_string(::getpid());
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) throw ValidationError("cannot write '" + tmp.string() + "'");
        f << text;
        f.close();
        if (!f) {
            std::error_code ec;
            fs::remove(tmp, ec);
            throw ValidationError("failed writing '" + tmp.string() + "'");
        }
    }
    std::error_code ec;
    fs::rename(tmp, target, ec);
    if (ec) {
        fs::remove(tmp, ec);
        throw ValidationError("cannot move output into place at '" + path + "'");
    }
}

int main_entry(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    try {
        const auto config = parse_args(argc, argv, out);
        if (!config) return 0;
        const std::string text = render(*config);
        if (config->out.empty()) {
            out << text;
        } else {
            write_atomically(config->out, text);
        }
        return 0;
    } catch (const Error& e) {
        err << json{{"code", e.exit_code()}, {"kind", kind_of(e)}, {"message", e.what()}}.dump() << "\n";
        return e.exit_code();
    } catch (const std::exception& e) {
        err << json{{"code", 3}, {"kind", "numeric"}, {"message", e.what()}}.dump() << "\n";
        return 3;
    }
}

}  // namespace chanest::cli
