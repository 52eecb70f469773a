#include "cli.hpp"

#include <fstream>
#include <functional>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "config.hpp"
#include "ptorus/curvature.hpp"
#include "ptorus/format.hpp"
#include "ptorus/gle.hpp"
#include "ptorus/green.hpp"
#include "ptorus/parallel.hpp"
#include "ptorus/pvi.hpp"

namespace ptorus::cli {

namespace {

/// Small builder for flat JSON objects with fixed key order.
class JsonObject {
public:
    JsonObject& raw(const std::string& key, const std::string& value)
    {
        parts_.push_back(json_string(key) + ": " + value);
        return *this;
    }
    JsonObject& num(const std::string& key, double v) { return raw(key, json_number(v)); }
    JsonObject& integer(const std::string& key, long long v) { return raw(key, std::to_string(v)); }
    JsonObject& cx(const std::string& key, cplx v) { return raw(key, json_complex(v)); }
    JsonObject& str(const std::string& key, const std::string& v) { return raw(key, json_string(v)); }
    JsonObject& boolean(const std::string& key, bool v) { return raw(key, v ? "true" : "false"); }

    std::string text() const
    {
        std::string out = "{";
        for (std::size_t i = 0; i < parts_.size(); ++i)
            out += (i ? ", " : "") + parts_[i];
        return out + "}";
    }

private:
    std::vector<std::string> parts_;
};

std::string json_array(const std::vector<std::string>& items)
{
    std::string out = "[";
    for (std::size_t i = 0; i < items.size(); ++i)
        out += (i ? ", " : "") + items[i];
    return out + "]";
}

/// quantity,re,im rows.
class ComplexTable {
public:
    ComplexTable& add(const std::string& name, cplx v)
    {
        rows_ += name + "," + fmt17(v.real()) + "," + fmt17(v.imag()) + "\n";
        return *this;
    }
    ComplexTable& add(const std::string& name, double v) { return add(name, cplx(v, 0.0)); }
    std::string text() const { return "quantity,re,im\n" + rows_; }

private:
    std::string rows_;
};

struct Inputs {
    std::string tau = "";
    std::string tau1 = "";
    std::string z = "";
    std::string p = "";
    std::string q0 = "";
    std::string n = "0";
    double r = 0.0;
    double s = 0.0;
    double h = 1e-3;
    double beta = 1.0;
    double match_tol = 1e-3;
    int steps = 4;
    int res = 64;
};

struct Context {
    RunConfig cfg;
    Inputs in;
    CLI::App* sub = nullptr;

    bool given(const std::string& flag) const { return sub->count(flag) > 0; }
    Format format(Format fallback = Format::Json) const
    {
        return cfg.output_format.value_or(fallback);
    }
    EllipticContext ctx() const { return EllipticContext(parse_tau(in.tau), kDefaultTol, cfg.series_tol); }
    EllipticContext ctx_at(const Tau& tau) const { return EllipticContext(tau, kDefaultTol, cfg.series_tol); }
    TransferOptions transfer() const
    {
        TransferOptions o;
        o.rel_tol = cfg.ode_rel_tol;
        o.abs_tol = 1e-2 * cfg.ode_rel_tol;
        return o;
    }
    CycleOptions cycles() const
    {
        CycleOptions o;
        o.clearance = cfg.clearance;
        return o;
    }
    MembershipOptions membership() const
    {
        MembershipOptions o;
        o.match_tol = in.match_tol;
        o.newton_max_iter = cfg.newton_max_iter;
        o.critical.max_iter = std::max(cfg.newton_max_iter, 1);
        return o;
    }
    MonodromyParams rs() const
    {
        MonodromyParams mp{in.r, in.s};
        mp.validate();
        return mp;
    }
};

std::string matrix_rows(const std::string& name, const Mat2& m)
{
    std::string out;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
            out += name + "," + std::to_string(i) + "," + std::to_string(j) + "," +
                   fmt17(m(i, j).real()) + "," + fmt17(m(i, j).imag()) + "\n";
    return out;
}

std::string class_json(const MonodromyClass& c)
{
    if (const auto* a = std::get_if<CompletelyReducible>(&c))
        return JsonObject().str("type", "completely_reducible").cx("r", a->r).cx("s", a->s).text();
    const auto& b = std::get<NotCompletelyReducible>(c);
    JsonObject o;
    o.str("type", "not_completely_reducible").integer("eps1", b.eps1).integer("eps2", b.eps2);
    o.raw("C", b.C ? json_complex(*b.C) : "null");
    return o.text();
}

// Subcommands. Each returns the text to emit.

std::string cmd_ctx(const Context& c)
{
    const EllipticContext e = c.ctx();
    const IdentityResiduals res = e.identity_residuals();
    if (c.format() == Format::Csv) {
        ComplexTable t;
        t.add("tau", e.tau().value()).add("nome", e.nome()).add("eta1", e.eta1()).add("eta2", e.eta2());
        t.add("e1", e.e1()).add("e2", e.e2()).add("e3", e.e3()).add("g2", e.g2()).add("g3", e.g3());
        for (int k = 0; k < 4; ++k)
            t.add("half_period_" + std::to_string(k), e.half_period(k));
        t.add("residual_e_sum", res.e_sum).add("residual_legendre", res.legendre);
        t.add("residual_g2", res.g2).add("residual_g3", res.g3);
        return t.text();
    }
    std::vector<std::string> halves;
    for (int k = 0; k < 4; ++k)
        halves.push_back(json_complex(e.half_period(k)));
    JsonObject o;
    o.cx("tau", e.tau().value()).cx("nome", e.nome()).integer("series_cutoff", e.series_cutoff());
    o.cx("eta1", e.eta1()).cx("eta2", e.eta2()).cx("e1", e.e1()).cx("e2", e.e2()).cx("e3", e.e3());
    o.cx("g2", e.g2()).cx("g3", e.g3()).raw("half_periods", json_array(halves));
    o.raw("identity_residuals", JsonObject()
                                    .num("e_sum", res.e_sum)
                                    .num("legendre", res.legendre)
                                    .num("g2", res.g2)
                                    .num("g3", res.g3)
                                    .text());
    return o.text() + "\n";
}

std::string cmd_eval(const Context& c)
{
    const EllipticContext e = c.ctx();
    const cplx z = parse_complex(c.in.z);
    const WeierstrassValues w = e.eval(z);
    if (c.format() == Format::Csv)
        return ComplexTable().add("z", z).add("zeta", w.zeta).add("wp", w.wp).add("dwp", w.dwp).text();
    return JsonObject().cx("tau", e.tau().value()).cx("z", z).cx("zeta", w.zeta).cx("wp", w.wp).cx("dwp", w.dwp).text() +
           "\n";
}

std::string cmd_green_crit(const Context& c)
{
    const EllipticContext e = c.ctx();
    std::optional<SingularPair> pair;
    if (!c.in.p.empty())
        pair.emplace(e, parse_complex(c.in.p));
    CriticalSearchOptions opts;
    opts.max_iter = c.cfg.newton_max_iter;
    const auto pts = find_critical_points(e, pair, opts);
    if (c.format() == Format::Csv) {
        std::string out = "r,s,re,im,kind,residual,hessian_det\n";
        for (const auto& cp : pts)
            out += fmt17(cp.location.r) + "," + fmt17(cp.location.s) + "," +
                   fmt17(cp.location.z.real()) + "," + fmt17(cp.location.z.imag()) + "," +
                   (cp.kind == CriticalKind::Trivial ? "trivial" : "nontrivial") + "," +
                   fmt17(cp.residual) + "," + fmt17(cp.hessian_det) + "\n";
        return out;
    }
    std::vector<std::string> items;
    for (const auto& cp : pts)
        items.push_back(JsonObject()
                            .num("r", cp.location.r)
                            .num("s", cp.location.s)
                            .cx("z", cp.location.z)
                            .str("kind", cp.kind == CriticalKind::Trivial ? "trivial" : "nontrivial")
                            .num("residual", cp.residual)
                            .num("hessian_det", cp.hessian_det)
                            .text());
    JsonObject o;
    o.cx("tau", e.tau().value()).raw("p", pair ? json_complex(pair->p().z) : "null");
    o.integer("count", static_cast<long long>(pts.size())).raw("critical_points", json_array(items));
    return o.text() + "\n";
}

std::string solution_point(const Context& c, const PVIIndex& index)
{
    const EllipticContext e = c.ctx();
    const MonodromyParams mp = c.rs();
    const PviPoint pt = index.is_zero() ? hitchin_p(e, mp) : okamoto_p_1000(e, mp);
    const cplx a = mp.point(e.tau());
    const cplx Z = z_rs(e, mp);
    if (c.format() == Format::Csv)
        return ComplexTable().add("a", a).add("Z", Z).add("p", pt.p.z).add("wp", pt.wp).text();
    return JsonObject()
               .cx("tau", e.tau().value())
               .str("index", index.to_string())
               .num("r", c.in.r)
               .num("s", c.in.s)
               .cx("a", a)
               .cx("Z", Z)
               .cx("p", pt.p.z)
               .cx("wp", pt.wp)
               .text() +
           "\n";
}

std::string cmd_epvi_check(const Context& c)
{
    const PVIIndex index = parse_index(c.in.n);
    const Tau tau = parse_tau(c.in.tau);
    const EpviTerms t = epvi_terms(solution_family(c.rs(), index), index, tau, c.in.h, kDefaultTol);
    if (!c.cfg.output_format)
        return fmt17(t.residual) + "\n";
    if (*c.cfg.output_format == Format::Csv)
        return "residual,h,p_re,p_im,p_second_re,p_second_im,rhs_re,rhs_im\n" + fmt17(t.residual) +
               "," + fmt17(c.in.h) + "," + fmt17(t.p.real()) + "," + fmt17(t.p.imag()) + "," +
               fmt17(t.p_second.real()) + "," + fmt17(t.p_second.imag()) + "," +
               fmt17(t.rhs.real()) + "," + fmt17(t.rhs.imag()) + "\n";
    return JsonObject()
               .cx("tau", tau.value())
               .str("index", index.to_string())
               .num("h", c.in.h)
               .num("residual", t.residual)
               .cx("p", t.p)
               .cx("p_second", t.p_second)
               .cx("rhs", t.rhs)
               .text() +
           "\n";
}

std::string cmd_pvi_flow(const Context& c)
{
    const PVIIndex index = parse_index(c.in.n);
    const Tau tau0 = parse_tau(c.in.tau), tau1 = parse_tau(c.in.tau1);
    if (c.in.steps < 1)
        throw UsageError("--steps must be at least 1");
    const PFamily fam = solution_family(c.rs(), index);
    const HamiltonianState s0 = state_from_family(fam, index, tau0, c.in.h);
    FlowOptions fo;
    fo.rel_tol = c.cfg.ode_rel_tol;
    fo.abs_tol = 1e-2 * c.cfg.ode_rel_tol;
    fo.context_tol = kDefaultTol;
    const auto states = hamiltonian_flow(index, s0, tau1, c.in.steps, fo);
    std::vector<double> deviation;
    for (const auto& st : states) {
        const EllipticContext e = c.ctx_at(Tau(st.tau));
        const cplx ref = fam(e);
        deviation.push_back(std::min(e.torus_distance(st.p, ref), e.torus_distance(st.p, -ref)));
    }
    if (c.format() == Format::Csv) {
        std::string out = "tau_re,tau_im,p_re,p_im,A_re,A_im,B_re,B_im,family_deviation\n";
        for (std::size_t i = 0; i < states.size(); ++i) {
            const auto& st = states[i];
            out += fmt17(st.tau.real()) + "," + fmt17(st.tau.imag()) + "," + fmt17(st.p.real()) +
                   "," + fmt17(st.p.imag()) + "," + fmt17(st.A.real()) + "," +
                   fmt17(st.A.imag()) + "," + fmt17(st.B.real()) + "," + fmt17(st.B.imag()) +
                   "," + fmt17(deviation[i]) + "\n";
        }
        return out;
    }
    std::vector<std::string> items;
    for (std::size_t i = 0; i < states.size(); ++i)
        items.push_back(JsonObject()
                            .cx("tau", states[i].tau)
                            .cx("p", states[i].p)
                            .cx("A", states[i].A)
                            .cx("B", states[i].B)
                            .num("family_deviation", deviation[i])
                            .text());
    return JsonObject()
               .str("index", index.to_string())
               .num("r", c.in.r)
               .num("s", c.in.s)
               .raw("states", json_array(items))
               .text() +
           "\n";
}

struct Pipeline {
    EllipticContext ctx;
    GLEParams params;
    MonodromyRep rep;
};

Pipeline run_pipeline(const Context& c)
{
    const PVIIndex index = parse_index(c.in.n);
    const Tau tau = parse_tau(c.in.tau);
    const HamiltonianState st = state_from_family(solution_family(c.rs(), index), index, tau, c.in.h);
    EllipticContext e = c.ctx();
    GLEParams params(e, index, st.p, st.A);
    std::optional<cplx> q0;
    if (!c.in.q0.empty())
        q0 = parse_complex(c.in.q0);
    MonodromyRep rep = monodromy(e, params, q0, c.cycles(), c.transfer());
    return {e, params, rep};
}

std::string cmd_mono(const Context& c)
{
    const Pipeline pl = run_pipeline(c);
    const MonodromyRep& rep = pl.rep;
    const MonodromyClass cls = classify(rep, c.cfg.tolerance);
    const auto unitary = is_unitary(rep, c.cfg.tolerance);
    if (c.format() == Format::Csv)
        return "matrix,row,col,re,im\n" + matrix_rows("N1", rep.N1) + matrix_rows("N2", rep.N2) +
               matrix_rows("gamma_plus", rep.gamma_plus) + matrix_rows("gamma_minus", rep.gamma_minus);
    JsonObject o;
    o.cx("tau", pl.ctx.tau().value()).str("index", pl.params.index().to_string());
    o.cx("p", pl.params.p()).cx("A", pl.params.A()).cx("B", pl.params.B());
    o.cx("basepoint", rep.basepoint);
    o.raw("N1", matrix_to_json(rep.N1)).raw("N2", matrix_to_json(rep.N2));
    o.raw("gamma_plus", matrix_to_json(rep.gamma_plus)).raw("gamma_minus", matrix_to_json(rep.gamma_minus));
    o.num("det_defect", rep.det_defect()).num("commutator_norm", rep.commutator_norm());
    o.num("local_defect", rep.local_defect());
    o.raw("class", class_json(cls));
    o.raw("recovered", unitary ? JsonObject().num("r", (*unitary)[0]).num("s", (*unitary)[1]).text()
                               : "null");
    return o.text() + "\n";
}

std::string cmd_omega_test(const Context& c)
{
    const EllipticContext e = c.ctx();
    const PVIIndex index = parse_index(c.in.n);
    const cplx p = parse_complex(c.in.p);
    const auto w = omega_membership(e, SingularPair(e, p), index, c.membership());
    if (c.format() == Format::Csv) {
        const double nan = std::numeric_limits<double>::quiet_NaN();
        return "member,witness_r,witness_s,residual\n" + std::string(w ? "1" : "0") + "," +
               fmt17(w ? w->r : nan) + "," + fmt17(w ? w->s : nan) + "," +
               fmt17(w ? w->residual : nan) + "\n";
    }
    JsonObject o;
    o.cx("tau", e.tau().value()).cx("p", p).str("index", index.to_string()).boolean("member", bool(w));
    o.raw("witness", w ? JsonObject().num("r", w->r).num("s", w->s).text() : "null");
    o.raw("residual", w ? json_number(w->residual) : "null");
    return o.text() + "\n";
}

std::string cmd_omega_scan(const Context& c)
{
    const RegionSample s =
        omega_scan(parse_tau(c.in.tau), parse_index(c.in.n), c.in.res, c.membership(), kDefaultTol);
    return c.format() == Format::Csv ? region_to_csv(s) : region_to_json(s);
}

std::string cmd_synth(const Context& c)
{
    const Pipeline pl = run_pipeline(c);
    const EigenBasis basis = eigenbasis(pl.ctx, pl.params, pl.rep);
    const SolutionField f = u_field(pl.ctx, pl.params, basis, c.in.res, c.in.beta);
    if (c.format() == Format::Csv)
        return field_to_csv(f);
    std::string header = field_header_json(f);
    while (!header.empty() && header.back() == '\n')
        header.pop_back();
    JsonObject o;
    o.num("r", basis.r).num("s", basis.s).cx("wronskian", basis.wronskian);
    o.num("evenness_defect", evenness_defect(pl.ctx, pl.params, basis, f));
    o.raw("field", header);
    return o.text() + "\n";
}

void write_output(const std::string& text, const std::string& path, std::ostream& out)
{
    if (path.empty()) {
        out << text;
        return;
    }
    std::ofstream f(path, std::ios::binary);
    if (!f)
        throw UsageError("cannot write '" + path + "'");
    f << text;
}

} // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Painleve VI on the torus: elliptic functions, Green function critical points, "
                 "Hitchin solutions, generalized Lame monodromy and curvature-equation solutions."};
    app.name("painleve-torus");
    app.set_help_flag("--help", "Print this help message and exit");
    app.require_subcommand(1);
    app.fallthrough();

    std::optional<double> tolerance, ode_rel_tol, clearance, series_tol;
    std::optional<int> newton_max_iter, threads;
    std::string config_path, out_path, format_text;
    app.add_option("--tolerance", tolerance, "Classification and unitarity tolerance (1e-6)");
    app.add_option("--ode-rel-tol", ode_rel_tol, "Relative tolerance of ODE integrations (1e-10)");
    app.add_option("--clearance", clearance, "Detour clearance of monodromy paths (0 = automatic)");
    app.add_option("--newton-max-iter", newton_max_iter, "Newton iteration cap (40)");
    app.add_option("--series-tol", series_tol, "Truncation tolerance of theta series (1e-10)");
    app.add_option("--threads", threads,
                   "Worker thread cap (default: PAINLEVE_TORUS_THREADS, else all cores)");
    app.add_option("--config", config_path, "key = value file; flags take precedence");
    app.add_option("--out", out_path, "Write the result to this file instead of stdout");
    app.add_option("--format", format_text, "json or csv (default json, or from the --out suffix)")
        ->check(CLI::IsMember({"json", "csv"}));

    Context c;
    Inputs& in = c.in;
    using Command = std::function<std::string(const Context&)>;
    std::vector<std::pair<CLI::App*, Command>> commands;

    auto add = [&](const std::string& name, const std::string& help, Command fn) {
        CLI::App* sub = app.add_subcommand(name, help);
        commands.emplace_back(sub, std::move(fn));
        return sub;
    };
    auto tau_opt = [&](CLI::App* sub) {
        sub->add_option("--tau", in.tau, "Modulus tau as re,im with im > 0")->required();
    };
    auto rs_opts = [&](CLI::App* sub) {
        sub->add_option("--r", in.r, "Monodromy exponent r (real)")->required();
        sub->add_option("--s", in.s, "Monodromy exponent s (real)")->required();
    };
    auto n_opt = [&](CLI::App* sub) {
        sub->add_option("--n", in.n, "Index: 0 or n0,n1,n2,n3 (supported: 0 and 1,0,0,0)");
    };

    auto* s_ctx = add("ctx",
                      "Lattice data of tau: nome, quasi-periods eta1/eta2, e1..e3, g2, g3, half periods "
                      "and identity residuals.",
                      cmd_ctx);
    tau_opt(s_ctx);

    auto* s_eval = add("eval", "Weierstrass zeta, wp and wp' at z.", cmd_eval);
    tau_opt(s_eval);
    s_eval->add_option("--z", in.z, "Point z as re,im")->required();

    auto* s_green = add("green-crit",
                        "Critical points of the torus Green function G, or of "
                        "G_p = (G(z-p) + G(z+p))/2 when --p is given, with Hessian determinants.",
                        cmd_green_crit);
    tau_opt(s_green);
    s_green->add_option("--p", in.p, "Source point p as re,im");

    auto* s_hit = add("hitchin",
                      "Hitchin's formula: wp(p) = wp(a) + wp'(a) / (2 Z_{r,s}(a)), a = r + s tau; the "
                      "elliptic PVI solution with all alpha_k = 1/8.",
                      [](const Context& c) { return solution_point(c, PVIIndex()); });
    tau_opt(s_hit);
    rs_opts(s_hit);

    auto* s_oka = add("okamoto",
                      "Okamoto-transformed solution for index (1,0,0,0): the explicit rational "
                      "function of wp(a), wp'(a), Z_{r,s}.",
                      [](const Context& c) { return solution_point(c, PVIIndex::okamoto_1000()); });
    tau_opt(s_oka);
    rs_opts(s_oka);

    auto* s_epvi = add("epvi-check",
                       "Finite-difference residual of the elliptic form of Painleve VI for the "
                       "Hitchin (n = 0) or Okamoto (n = 1,0,0,0) solution.",
                       cmd_epvi_check);
    tau_opt(s_epvi);
    rs_opts(s_epvi);
    n_opt(s_epvi);
    s_epvi->add_option("--h,--step", in.h, "Step along real tau (1e-3)");

    auto* s_flow = add("pvi-flow",
                       "Isomonodromic Hamiltonian flow of (p, A) from tau to tau1, started on the "
                       "solution with exponents (r, s); reports the deviation from that solution.",
                       cmd_pvi_flow);
    tau_opt(s_flow);
    s_flow->add_option("--tau1", in.tau1, "End point of the straight tau segment")->required();
    rs_opts(s_flow);
    n_opt(s_flow);
    s_flow->add_option("--steps", in.steps, "Number of equal output intervals (4)");
    s_flow->add_option("--h,--step", in.h, "Step for dp/dtau in the initial A (1e-3)");

    auto* s_mono = add("mono",
                       "Monodromy of the generalized Lame equation with apparent singularities at "
                       "+-p: N1, N2, local monodromies, class (completely reducible or not) and "
                       "recovered unitary (r, s).",
                       cmd_mono);
    tau_opt(s_mono);
    rs_opts(s_mono);
    n_opt(s_mono);
    s_mono->add_option("--q0", in.q0, "Basepoint as re,im (default near 0.37 + 0.29 tau)");
    s_mono->add_option("--h,--step", in.h, "Step for dp/dtau in A (1e-3)");

    auto* s_otest = add("omega-test",
                        "Membership of p in Omega_tau^n: some real (r, s) whose solution passes "
                        "through +-p at tau, or none.",
                        cmd_omega_test);
    tau_opt(s_otest);
    s_otest->add_option("--p", in.p, "Point p as re,im")->required();
    n_opt(s_otest);
    s_otest->add_option("--match-tol", in.match_tol, "Relative wp match tolerance (1e-3)");

    auto* s_oscan = add("omega-scan",
                        "Heat map of Omega_tau^n over the cell centers r + s tau of a res x res "
                        "grid; cells within 2/res of a half period are excluded.",
                        cmd_omega_scan);
    tau_opt(s_oscan);
    n_opt(s_oscan);
    s_oscan->add_option("--res", in.res, "Cells per axis, at least 16 (64)");
    s_oscan->add_option("--match-tol", in.match_tol, "Relative wp match tolerance (1e-3)");

    auto* s_synth = add("synth",
                        "Solution u_beta of the curvature equation Delta u + e^u = 0 with sources at "
                        "+-p, built from the developing map of the unitary monodromy.",
                        cmd_synth);
    tau_opt(s_synth);
    rs_opts(s_synth);
    n_opt(s_synth);
    s_synth->add_option("--res", in.res, "Grid nodes per axis minus one, at least 32 (64)");
    s_synth->add_option("--beta", in.beta, "Member of the beta family, beta > 0 (1)");
    s_synth->add_option("--h,--step", in.h, "Step for dp/dtau in A (1e-3)");

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        const CLI::App* target = &app;
        for (const auto& [sub, fn] : commands)
            if (sub->parsed())
                target = sub;
        out << target->help();
        return kOk;
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {
            out << app.help();
            return kOk;
        }
        err << "error: " << e.what() << "\n";
        return kUsage;
    }

    try {
        if (!config_path.empty())
            apply_config(c.cfg, read_config_file(config_path));
        if (tolerance)
            c.cfg.tolerance = *tolerance;
        if (ode_rel_tol)
            c.cfg.ode_rel_tol = *ode_rel_tol;
        if (clearance)
            c.cfg.clearance = *clearance;
        if (newton_max_iter)
            c.cfg.newton_max_iter = *newton_max_iter;
        if (series_tol)
            c.cfg.series_tol = *series_tol;
        if (threads)
            c.cfg.threads = *threads;
        if (!format_text.empty())
            c.cfg.output_format = parse_format(format_text);
        else if (!c.cfg.output_format && !out_path.empty())
            c.cfg.output_format = format_from_path(out_path);
        c.cfg.validate();
        set_max_threads(c.cfg.threads);

        for (const auto& [sub, fn] : commands) {
            if (!sub->parsed())
                continue;
            c.sub = sub;
            write_output(fn(c), out_path, out);
        }
        set_max_threads(0);
        return kOk;
    } catch (const UsageError& e) {
        err << "error: " << e.what() << "\n";
        set_max_threads(0);
        return kUsage;
    } catch (const NumericError& e) {
        err << "error: " << e.what() << "\n";
        set_max_threads(0);
        return exit_code_for(e.kind());
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        set_max_threads(0);
        return kNoConvergence;
    }
}

} // namespace ptorus::cli
