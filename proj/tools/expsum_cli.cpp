// expsum_cli.cpp
//
// Batch front end for the expsum-lab library.  Output is files-first: each
// subcommand writes CSV or JSON plus a sibling <out>.manifest.json naming
// the command, its parameters, the seed, the weight identifier and the
// tool version, with a one-line summary on stdout.
//
// Exit codes: 0 success, 2 argument error, 3 computational error
// (stabilization, convergence or empty-sphere failures).

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "expsum/counting.hpp"
#include "expsum/densities.hpp"
#include "expsum/expsums.hpp"
#include "expsum/linnik.hpp"
#include "expsum/modarith.hpp"
#include "expsum/oscillatory.hpp"
#include "expsum/sphere.hpp"

using nlohmann::json;
using namespace expsum;

namespace {

constexpr const char* kToolVersion = "0.1.0";

struct run_manifest {
    std::string command;
    std::map<std::string, std::string> parameters;
    std::optional<u64> seed;
};

void write_manifest(const std::string& out_path, const run_manifest& m, double wall_seconds) {
    json j;
    j["command"] = m.command;
    j["parameters"] = m.parameters;
    if (m.seed)
        j["seed"] = *m.seed;
    else
        j["seed"] = nullptr;
    j["w0_identifier"] = kW0Identifier;
    j["tool_version"] = kToolVersion;
    j["wall_time_seconds"] = wall_seconds;
    std::ofstream os(out_path + ".manifest.json");
    if (!os) throw std::runtime_error("cannot write manifest beside " + out_path);
    os << j.dump(2) << "\n";
}

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

// numeric token that may be a rational like "3/5"
double parse_rational(const std::string& tok) {
    const auto slash = tok.find('/');
    if (slash == std::string::npos) return std::stod(tok);
    const double num = std::stod(tok.substr(0, slash));
    const double den = std::stod(tok.substr(slash + 1));
    if (den == 0.0) throw CLI::ValidationError("rational with zero denominator: " + tok);
    return num / den;
}

std::vector<std::string> split_commas(const std::string& s) {
    std::vector<std::string> out;
    std::size_t pos = 0;
    while (pos <= s.size()) {
        const auto next = s.find(',', pos);
        if (next == std::string::npos) {
            out.push_back(s.substr(pos));
            break;
        }
        out.push_back(s.substr(pos, next - pos));
        pos = next + 1;
    }
    return out;
}

vec4 parse_vec4(const std::string& s) {
    const auto toks = split_commas(s);
    if (toks.size() != 4) throw CLI::ValidationError("expected 4 comma-separated components: " + s);
    vec4 v{};
    for (int i = 0; i < 4; ++i) v[i] = parse_rational(toks[static_cast<std::size_t>(i)]);
    return v;
}

ivec4 parse_ivec4(const std::string& s) {
    const auto toks = split_commas(s);
    if (toks.size() != 4) throw CLI::ValidationError("expected 4 comma-separated integers: " + s);
    ivec4 v{};
    for (int i = 0; i < 4; ++i) v[i] = std::stoll(toks[static_cast<std::size_t>(i)]);
    return v;
}

std::vector<double> parse_double_list(const std::string& s) {
    std::vector<double> out;
    for (const auto& t : split_commas(s)) out.push_back(std::stod(t));
    return out;
}

std::vector<i64> parse_i64_list(const std::string& s) {
    std::vector<i64> out;
    for (const auto& t : split_commas(s)) out.push_back(std::stoll(t));
    return out;
}

// direction from --xi / --from-point / --xi-seed; exactly one must be given
struct direction_input {
    std::string xi_text;
    std::string point_text;
    i64 xi_seed = -1;
    bool normalize = false;

    vec4 resolve(std::optional<u64>& seed_out) const {
        const int given = (!xi_text.empty()) + (!point_text.empty()) + (xi_seed >= 0);
        if (given != 1) throw CLI::ValidationError("give exactly one of --xi, --from-point, --xi-seed");
        if (!xi_text.empty()) {
            vec4 xi = parse_vec4(xi_text);
            if (!is_unit(xi)) {
                if (!normalize) throw CLI::ValidationError("--xi is not a unit vector; pass --normalize to rescale");
                xi = normalized(xi);
            }
            return xi;
        }
        if (!point_text.empty()) {
            const ivec4 p = parse_ivec4(point_text);
            const vec4 v{static_cast<double>(p[0]), static_cast<double>(p[1]), static_cast<double>(p[2]),
                         static_cast<double>(p[3])};
            return normalized(v);
        }
        seed_out = static_cast<u64>(xi_seed);
        rng64 rng(static_cast<u64>(xi_seed));
        return rng.unit4();
    }

    void attach(CLI::App* cmd) {
        cmd->add_option("--xi", xi_text, "direction as 4 comma-separated rationals (e.g. 1/2,1/2,1/2,1/2)");
        cmd->add_option("--from-point", point_text, "lattice point x1,x2,x3,x4; the normalized direction is used");
        cmd->add_option("--xi-seed", xi_seed, "draw the direction uniformly from this seed");
        cmd->add_flag("--normalize", normalize, "allow non-unit --xi and rescale it");
    }
};

struct out_writer {
    std::string path;
    run_manifest manifest;
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();

    std::ofstream open() {
        std::ofstream os(path);
        if (!os) throw std::runtime_error("cannot open output file " + path);
        return os;
    }
    void finish() {
        const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        write_manifest(path, manifest, wall);
    }
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"expsum-lab: exponential sums, sphere caps and local densities"};
    app.require_subcommand(1);
    int threads = 0;
    app.add_option("--threads", threads, "cap worker parallelism (default: EXPSUM_LAB_THREADS or all cores)");

    // ---- kloosterman ----
    auto* c_kl = app.add_subcommand("kloosterman", "Kloosterman sum S(m,n;c)");
    i64 kl_m = 1, kl_n = 1, kl_c = 1;
    bool kl_fast = false;
    std::string kl_out;
    c_kl->add_option("--m", kl_m)->required();
    c_kl->add_option("--n", kl_n)->required();
    c_kl->add_option("--c", kl_c)->required()->check(CLI::PositiveNumber);
    c_kl->add_flag("--fast", kl_fast, "use the factored (twisted multiplicativity) path");
    c_kl->add_option("--out", kl_out, "write m,n,c,re,im CSV here");

    // ---- gauss ----
    auto* c_ga = app.add_subcommand("gauss", "quadratic Gauss sum G(s,t;q)");
    i64 ga_s = 1, ga_t = 0, ga_q = 1;
    std::string ga_method = "both", ga_out;
    c_ga->add_option("--s", ga_s)->required();
    c_ga->add_option("--t", ga_t)->required();
    c_ga->add_option("--q", ga_q)->required()->check(CLI::PositiveNumber);
    c_ga->add_option("--method", ga_method)->check(CLI::IsMember({"both", "brute", "closed"}));
    c_ga->add_option("--out", ga_out, "write s,t,q,method,re,im CSV here");

    // ---- sq ----
    auto* c_sq = app.add_subcommand("sq", "circle-method sum S_q(c)");
    i64 sq_q = 1, sq_N = 4;
    std::string sq_c_text, sq_method = "both", sq_out;
    c_sq->add_option("--q", sq_q)->required()->check(CLI::PositiveNumber);
    c_sq->add_option("--c", sq_c_text, "c1,c2,c3,c4")->required();
    c_sq->add_option("--N", sq_N, "positive multiple of 4")->required();
    c_sq->add_option("--method", sq_method)->check(CLI::IsMember({"both", "brute", "reduced"}));
    c_sq->add_option("--out", sq_out);

    // ---- linnik ----
    auto* c_li = app.add_subcommand("linnik", "twisted Linnik partial sums and growth exponent");
    linnik_query li_q;
    int li_checkpoints = 24;
    double li_tail = 0.5;
    std::string li_out = "linnik_trace.csv";
    c_li->add_option("--m", li_q.m)->required();
    c_li->add_option("--n", li_q.n)->required();
    c_li->add_option("--k", li_q.k)->default_val(1);
    c_li->add_option("--a", li_q.a)->default_val(0);
    c_li->add_option("--alpha", li_q.alpha)->default_val(0.0);
    c_li->add_option("--B", li_q.bound_B)->default_val(1.0);
    c_li->add_option("--X", li_q.X)->required()->check(CLI::PositiveNumber);
    c_li->add_option("--checkpoints", li_checkpoints)->default_val(24);
    c_li->add_option("--tail-fraction", li_tail)->default_val(0.5);
    c_li->add_option("--out", li_out);

    // ---- sphere ----
    auto* c_sp = app.add_subcommand("sphere", "integer points on F(x) = n");
    i64 sp_n = 1;
    std::string sp_out = "sphere_points.csv";
    c_sp->add_option("--n", sp_n)->required()->check(CLI::PositiveNumber);
    c_sp->add_option("--out", sp_out);

    // ---- cap ----
    auto* c_cap = app.add_subcommand("cap", "spherical cap gap around a direction");
    i64 cap_n = 1;
    direction_input cap_dir;
    std::string cap_out = "cap_report.csv";
    c_cap->add_option("--n", cap_n)->required()->check(CLI::PositiveNumber);
    cap_dir.attach(c_cap);
    c_cap->add_option("--out", cap_out);

    // ---- cover ----
    auto* c_cov = app.add_subcommand("cover", "covering-exponent estimates");
    std::string cov_nlist, cov_rrange, cov_out = "cover.csv";
    i64 cov_samples = 1000, cov_seed = 1;
    int cov_two_adic = 0;
    c_cov->add_option("--n-list", cov_nlist, "comma-separated n values");
    c_cov->add_option("--r-range", cov_rrange, "lo:hi[:step]; uses n = r^2");
    c_cov->add_option("--samples", cov_samples)->check(CLI::PositiveNumber);
    c_cov->add_option("--seed", cov_seed)->required();
    c_cov->add_option("--max-two-adic", cov_two_adic, "largest allowed v_2(n); default 0 keeps odd n only");
    c_cov->add_option("--out", cov_out);

    // ---- densities ----
    auto* c_de = app.add_subcommand("densities", "sigma_p, singular series and sigma_infinity report");
    i64 de_N = 4, de_P = 1000, de_kmax = 24;
    double de_eps = 0.1, de_quad_tol = 1e-7, de_delta_prime = 0.05;
    std::string de_out = "densities.json";
    c_de->add_option("--N", de_N)->required()->check(CLI::PositiveNumber);
    c_de->add_option("--prime-cutoff", de_P)->default_val(1000);
    c_de->add_option("--eps", de_eps)->default_val(0.1);
    c_de->add_option("--quad-tol", de_quad_tol)->default_val(1e-7);
    c_de->add_option("--delta-prime", de_delta_prime, "exponent slack in the reported tail bound");
    c_de->add_option("--k-max", de_kmax)->default_val(24);
    c_de->add_option("--out", de_out);

    // ---- sigma-w ----
    auto* c_sw = app.add_subcommand("sigma-w", "weighted cap count Sigma(w)");
    i64 sw_r = 51;
    double sw_eps = 0.0, sw_eps_exp = 0.0;
    direction_input sw_dir;
    std::string sw_out;
    c_sw->add_option("--r", sw_r)->required()->check(CLI::PositiveNumber);
    c_sw->add_option("--eps", sw_eps);
    c_sw->add_option("--eps-exponent", sw_eps_exp, "use eps = N^{-exponent}");
    sw_dir.attach(c_sw);
    c_sw->add_option("--out", sw_out);

    // ---- compare ----
    auto* c_cmp = app.add_subcommand("compare", "Sigma(w) against the main term");
    i64 cmp_r = 51, cmp_P = 1000;
    double cmp_eps_exp = 0.125, cmp_quad_tol = 1e-6;
    direction_input cmp_dir;
    std::string cmp_out = "compare.csv";
    c_cmp->add_option("--r", cmp_r)->required()->check(CLI::PositiveNumber);
    c_cmp->add_option("--eps-exponent", cmp_eps_exp)->default_val(0.125);
    c_cmp->add_option("--prime-cutoff", cmp_P)->default_val(1000);
    c_cmp->add_option("--quad-tol", cmp_quad_tol)->default_val(1e-6);
    cmp_dir.attach(c_cmp);
    c_cmp->add_option("--out", cmp_out);

    // ---- phase ----
    auto* c_ph = app.add_subcommand("phase", "stationary-phase remainder decay table");
    int ph_n = 1, ph_order = 0;
    double ph_decay = 1.0, ph_quad_tol = 1e-9, ph_radius = 8.0;
    std::string ph_grid = "25,50,100", ph_out = "phase.csv";
    c_ph->add_option("--n", ph_n, "dimension (1..3)")->default_val(1);
    c_ph->add_option("--order", ph_order, "number of expansion terms beyond the leading one")->default_val(0);
    c_ph->add_option("--decay", ph_decay, "test function exp(-decay * ||x||^2)")->default_val(1.0);
    c_ph->add_option("--lambda-grid", ph_grid);
    c_ph->add_option("--quad-tol", ph_quad_tol)->default_val(1e-9);
    c_ph->add_option("--radius", ph_radius)->default_val(8.0);
    c_ph->add_option("--out", ph_out);

    CLI11_PARSE(app, argc, argv);

    try {
        if (*c_kl) {
            const cplx v = kl_fast ? kloosterman_fast({kl_m, kl_n, kl_c}, factorize(kl_c))
                                   : kloosterman({kl_m, kl_n, kl_c});
            std::printf("S(%lld,%lld;%lld) = %.12g %s %.12gi\n", static_cast<long long>(kl_m),
                        static_cast<long long>(kl_n), static_cast<long long>(kl_c), v.real(),
                        v.imag() < 0 ? "-" : "+", std::abs(v.imag()));
            if (!kl_out.empty()) {
                out_writer w{kl_out,
                             {"kloosterman",
                              {{"m", std::to_string(kl_m)},
                               {"n", std::to_string(kl_n)},
                               {"c", std::to_string(kl_c)},
                               {"fast", kl_fast ? "true" : "false"}},
                              std::nullopt}};
                auto os = w.open();
                os << "m,n,c,re,im\n"
                   << kl_m << ',' << kl_n << ',' << kl_c << ',' << fmt(v.real()) << ',' << fmt(v.imag()) << "\n";
                w.finish();
            }
        } else if (*c_ga) {
            out_writer w{ga_out,
                         {"gauss",
                          {{"s", std::to_string(ga_s)},
                           {"t", std::to_string(ga_t)},
                           {"q", std::to_string(ga_q)},
                           {"method", ga_method}},
                          std::nullopt}};
            std::ofstream os;
            if (!ga_out.empty()) {
                os = w.open();
                os << "s,t,q,method,re,im\n";
            }
            const auto emit = [&](const char* name, cplx v) {
                std::printf("G(%lld,%lld;%lld) [%s] = %.12g %s %.12gi\n", static_cast<long long>(ga_s),
                            static_cast<long long>(ga_t), static_cast<long long>(ga_q), name, v.real(),
                            v.imag() < 0 ? "-" : "+", std::abs(v.imag()));
                if (os.is_open())
                    os << ga_s << ',' << ga_t << ',' << ga_q << ',' << name << ',' << fmt(v.real()) << ','
                       << fmt(v.imag()) << "\n";
            };
            if (ga_method != "closed") emit("brute", gauss_bruteforce({ga_s, ga_t, ga_q}));
            if (ga_method != "brute") emit("closed", gauss_closed({ga_s, ga_t, ga_q}));
            if (os.is_open()) w.finish();
        } else if (*c_sq) {
            const ivec4 c = parse_ivec4(sq_c_text);
            if (sq_N <= 0 || sq_N % 4 != 0) throw CLI::ValidationError("--N must be a positive multiple of 4");
            out_writer w{sq_out,
                         {"sq",
                          {{"q", std::to_string(sq_q)},
                           {"c", sq_c_text},
                           {"N", std::to_string(sq_N)},
                           {"method", sq_method}},
                          std::nullopt}};
            std::ofstream os;
            if (!sq_out.empty()) {
                os = w.open();
                os << "q,c1,c2,c3,c4,N,method,re,im\n";
            }
            const auto emit = [&](const char* name, cplx v) {
                std::printf("S_%lld(c) [%s] = %.12g %s %.12gi\n", static_cast<long long>(sq_q), name, v.real(),
                            v.imag() < 0 ? "-" : "+", std::abs(v.imag()));
                if (os.is_open())
                    os << sq_q << ',' << c[0] << ',' << c[1] << ',' << c[2] << ',' << c[3] << ',' << sq_N << ','
                       << name << ',' << fmt(v.real()) << ',' << fmt(v.imag()) << "\n";
            };
            if (sq_method != "reduced") emit("brute", sq_bruteforce({sq_q, c, sq_N}));
            if (sq_method != "brute") emit("reduced", sq_reduced({sq_q, c, sq_N}));
            if (os.is_open()) w.finish();
        } else if (*c_li) {
            out_writer w{li_out,
                         {"linnik",
                          {{"m", std::to_string(li_q.m)},
                           {"n", std::to_string(li_q.n)},
                           {"k", std::to_string(li_q.k)},
                           {"a", std::to_string(li_q.a)},
                           {"alpha", fmt(li_q.alpha)},
                           {"B", fmt(li_q.bound_B)},
                           {"X", std::to_string(li_q.X)},
                           {"checkpoints", std::to_string(li_checkpoints)},
                           {"tail_fraction", fmt(li_tail)}},
                          std::nullopt}};
            const auto trace = linnik_trace(li_q, li_checkpoints, threads);
            w.manifest.parameters["selberg_range"] = trace.selberg_range ? "true" : "false";
            auto os = w.open();
            write_trace_csv(os, trace);
            w.finish();
            const cplx last = trace.checkpoints.back().value;
            std::printf("L(%lld) = %.12g %s %.12gi%s\n", static_cast<long long>(li_q.X), last.real(),
                        last.imag() < 0 ? "-" : "+", std::abs(last.imag()),
                        trace.selberg_range ? "  [Selberg range: sqrt(mn) > X]" : "");
            try {
                const auto fit = growth_exponent(trace, li_tail);
                std::printf("fitted growth exponent over the tail: %.4f (%zu checkpoints used, %zu dropped)\n",
                            fit.slope, fit.used, fit.dropped);
            } catch (const insufficient_data& e) {
                std::fprintf(stderr, "growth fit skipped: %s\n", e.what());
            }
            std::printf("trace written to %s\n", li_out.c_str());
        } else if (*c_sp) {
            out_writer w{sp_out, {"sphere", {{"n", std::to_string(sp_n)}}, std::nullopt}};
            const auto sphere = enumerate_sphere(sp_n, threads);
            auto os = w.open();
            os << "x1,x2,x3,x4\n";
            for (const auto& p : sphere.points) os << p[0] << ',' << p[1] << ',' << p[2] << ',' << p[3] << "\n";
            w.finish();
            std::printf("%zu points on F(x) = %lld written to %s (jacobi r4 check: %lld)\n", sphere.points.size(),
                        static_cast<long long>(sp_n), sp_out.c_str(), static_cast<long long>(jacobi_r4(sp_n)));
        } else if (*c_cap) {
            std::optional<u64> seed;
            const vec4 xi = cap_dir.resolve(seed);
            out_writer w{cap_out, {"cap", {{"n", std::to_string(cap_n)}}, seed}};
            const auto rep = cap_gap(xi, cap_n);
            auto os = w.open();
            os << "xi1,xi2,xi3,xi4,n,eps_min,nx1,nx2,nx3,nx4\n";
            os << fmt(xi[0]) << ',' << fmt(xi[1]) << ',' << fmt(xi[2]) << ',' << fmt(xi[3]) << ',' << cap_n << ','
               << fmt(rep.eps_min) << ',' << rep.nearest[0] << ',' << rep.nearest[1] << ',' << rep.nearest[2] << ','
               << rep.nearest[3] << "\n";
            w.finish();
            std::printf("eps_min = %.12g, nearest lattice point (%lld,%lld,%lld,%lld); report in %s\n", rep.eps_min,
                        static_cast<long long>(rep.nearest[0]), static_cast<long long>(rep.nearest[1]),
                        static_cast<long long>(rep.nearest[2]), static_cast<long long>(rep.nearest[3]),
                        cap_out.c_str());
        } else if (*c_cov) {
            std::vector<i64> ns;
            if (!cov_nlist.empty()) ns = parse_i64_list(cov_nlist);
            if (!cov_rrange.empty()) {
                std::vector<std::string> parts;
                std::size_t pos = 0;
                const std::string& s = cov_rrange;
                while (pos <= s.size()) {
                    const auto nxt = s.find(':', pos);
                    if (nxt == std::string::npos) {
                        parts.push_back(s.substr(pos));
                        break;
                    }
                    parts.push_back(s.substr(pos, nxt - pos));
                    pos = nxt + 1;
                }
                if (parts.size() < 2 || parts.size() > 3) throw CLI::ValidationError("--r-range wants lo:hi[:step]");
                const i64 lo = std::stoll(parts[0]), hi = std::stoll(parts[1]);
                const i64 step = parts.size() == 3 ? std::stoll(parts[2]) : 1;
                if (step < 1 || lo < 1 || hi < lo) throw CLI::ValidationError("bad --r-range");
                for (i64 r = lo; r <= hi; r += step) ns.push_back(r * r);
            }
            if (ns.empty()) throw CLI::ValidationError("give --n-list or --r-range");
            out_writer w{cov_out,
                         {"cover",
                          {{"n_count", std::to_string(ns.size())},
                           {"samples", std::to_string(cov_samples)},
                           {"max_two_adic", std::to_string(cov_two_adic)}},
                          static_cast<u64>(cov_seed)}};
            const auto rows = covering_exponent_estimate(ns, cov_samples, static_cast<u64>(cov_seed), cov_two_adic,
                                                         threads);
            auto os = w.open();
            os << "n,count,lambda_hat,K_hat\n";
            std::size_t skipped = 0;
            for (const auto& row : rows) {
                if (row.skipped) {
                    ++skipped;
                    std::fprintf(stderr, "skipped n=%lld: %s\n", static_cast<long long>(row.n), row.reason.c_str());
                    continue;
                }
                os << row.n << ',' << row.count << ',' << fmt(row.lambda_hat) << ',' << fmt(row.k_hat) << "\n";
            }
            w.finish();
            std::printf("%zu rows written to %s (%zu skipped)\n", rows.size() - skipped, cov_out.c_str(), skipped);
        } else if (*c_de) {
            out_writer w{de_out,
                         {"densities",
                          {{"N", std::to_string(de_N)},
                           {"prime_cutoff", std::to_string(de_P)},
                           {"eps", fmt(de_eps)},
                           {"quad_tol", fmt(de_quad_tol)},
                           {"delta_prime", fmt(de_delta_prime)},
                           {"k_max", std::to_string(de_kmax)}},
                          std::nullopt}};
            const auto ss = singular_series(de_N, de_P, de_delta_prime, de_kmax);
            const double s_inf = sigma_infinity(de_eps, de_quad_tol, threads);
            json j;
            j["N"] = de_N;
            j["sigma_infinity"] = s_inf;
            j["sigma_p"] = json::array();
            for (const auto& f : ss.factors) j["sigma_p"].push_back({{"p", f.p}, {"k_star", f.k_star}, {"value", f.value}});
            j["singular_series"] = ss.value;
            j["tail_bound"] = ss.tail_bound;
            auto os = w.open();
            os << j.dump(2) << "\n";
            w.finish();
            std::printf("N=%lld: singular series %.12g (tail bound %.3g), sigma_infinity(eps=%g) = %.12g -> %s\n",
                        static_cast<long long>(de_N), ss.value, ss.tail_bound, de_eps, s_inf, de_out.c_str());
        } else if (*c_sw) {
            if ((sw_eps > 0.0) == (sw_eps_exp > 0.0))
                throw CLI::ValidationError("give exactly one of --eps, --eps-exponent");
            std::optional<u64> seed;
            const vec4 xi = sw_dir.resolve(seed);
            const double N = static_cast<double>(4 * sw_r * sw_r);
            const double eps = sw_eps > 0.0 ? sw_eps : std::pow(N, -sw_eps_exp);
            const auto q = make_sigma_w_query(sw_r, xi, eps);
            const double val = sigma_w(q, threads);
            std::printf("Sigma(w) at r=%lld (N=%lld, eps=%.6g, v2(r)=%d) = %.12g\n", static_cast<long long>(sw_r),
                        static_cast<long long>(q.N()), eps, q.two_adic_valuation, val);
            if (!sw_out.empty()) {
                out_writer w{sw_out,
                             {"sigma-w", {{"r", std::to_string(sw_r)}, {"eps", fmt(eps)}}, seed}};
                auto os = w.open();
                os << "r,N,eps,sigma_w\n"
                   << sw_r << ',' << q.N() << ',' << fmt(eps) << ',' << fmt(val) << "\n";
                w.finish();
            }
        } else if (*c_cmp) {
            std::optional<u64> seed;
            const vec4 xi = cmp_dir.resolve(seed);
            const double N = static_cast<double>(4 * cmp_r * cmp_r);
            const double eps = std::pow(N, -cmp_eps_exp);
            const auto q = make_sigma_w_query(cmp_r, xi, eps);
            const auto ss = singular_series(q.N(), cmp_P);
            const double s_inf = sigma_infinity(eps, cmp_quad_tol, threads);
            const auto cmp = compare(q, ss, s_inf, threads);
            out_writer w{cmp_out,
                         {"compare",
                          {{"r", std::to_string(cmp_r)},
                           {"eps_exponent", fmt(cmp_eps_exp)},
                           {"prime_cutoff", std::to_string(cmp_P)},
                           {"quad_tol", fmt(cmp_quad_tol)}},
                          seed}};
            auto os = w.open();
            os << "r,N,eps,sigma_w,main_term,ratio,budget_ratio\n";
            os << cmp_r << ',' << q.N() << ',' << fmt(eps) << ',' << fmt(cmp.sigma_w) << ',' << fmt(cmp.main_term)
               << ',' << fmt(cmp.ratio) << ',' << fmt(cmp.budget_ratio) << "\n";
            w.finish();
            std::printf("r=%lld: Sigma(w)=%.6g, main term=%.6g, ratio=%.4f, budget ratio=%.4f -> %s\n",
                        static_cast<long long>(cmp_r), cmp.sigma_w, cmp.main_term, cmp.ratio, cmp.budget_ratio,
                        cmp_out.c_str());
        } else if (*c_ph) {
            const auto grid = parse_double_list(ph_grid);
            const double a = ph_decay;
            const phi_fn phi = [a, ph_n](const double* x) {
                double r2 = 0.0;
                for (int i = 0; i < ph_n; ++i) r2 += x[i] * x[i];
                return std::exp(-a * r2);
            };
            out_writer w{ph_out,
                         {"phase",
                          {{"n", std::to_string(ph_n)},
                           {"order", std::to_string(ph_order)},
                           {"decay", fmt(ph_decay)},
                           {"lambda_grid", ph_grid},
                           {"quad_tol", fmt(ph_quad_tol)},
                           {"radius", fmt(ph_radius)}},
                          std::nullopt}};
            const auto table = verify_expansion(phi, ph_n, ph_order, grid, ph_quad_tol, ph_radius);
            auto os = w.open();
            os << "lambda,abs_error,n,N_terms\n";
            for (const auto& row : table.rows)
                os << fmt(row.lambda) << ',' << fmt(row.abs_error) << ',' << ph_n << ',' << ph_order << "\n";
            w.finish();
            std::printf("fitted remainder decay slope: %.4f (theoretical exponent -%.2f) -> %s\n", table.slope,
                        0.5 * ph_n + ph_order + 1.0, ph_out.c_str());
        }
    } catch (const CLI::ValidationError& e) {
        std::fprintf(stderr, "argument error: %s\n", e.what());
        return 2;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "argument error: %s\n", e.what());
        return 2;
    } catch (const std::domain_error& e) {
        std::fprintf(stderr, "argument error: %s\n", e.what());
        return 2;
    } catch (const computation_error& e) {
        std::fprintf(stderr, "computation failed: %s\n", e.what());
        return 3;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
