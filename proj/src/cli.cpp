#include "nilderiv/cli.hpp"

#include <algorithm>
#include <array>
#include <fstream>
#include <functional>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "nilderiv/padic.hpp"
#include "nilderiv/sampling.hpp"

namespace nilderiv {

namespace {

using Config = std::array<std::uint32_t, 3>;  // (p, m, n)

struct Options {
    std::optional<std::uint32_t> p, m, n;
    std::vector<std::uint32_t> irr;
    std::string ring;
    std::string derivation, descent, frame, automorphism, derivations, elements, witnesses;
    std::optional<std::uint32_t> exponent;
    bool exhaustive = false;
    std::uint64_t seed = 1;
    std::string format = "json";
    std::string output;
};

struct Outcome {
    Json report;
    bool verdict = true;
    std::string summary;
};

using Handler = std::function<Outcome(const Options&)>;

template <class T>
std::string show(const T& v) {
    std::ostringstream os;
    os << v;
    return os.str();
}

std::string show_all(const std::vector<RingElement>& elems) {
    std::string out = "(";
    for (std::size_t i = 0; i < elems.size(); ++i) out += (i ? ", " : "") + show(elems[i]);
    return out + ")";
}

const Ring& ring_of(const Options& o) {
    if (!o.ring.empty()) {
        if (o.p || o.m || o.n || !o.irr.empty()) throw Error(ErrorKind::BadInput, "use either --ring or --p/--m/--n/--irr");
        return Ring::get(ring_spec_from_json(load_json(o.ring)));
    }
    if (!o.p || !o.n) throw Error(ErrorKind::BadInput, "select a ring with --ring FILE or --p P --n N [--m M] [--irr ...]");
    return Ring::get(RingSpec{make_field_spec(*o.p, o.m.value_or(1), o.irr), *o.n});
}

void require(const std::string& value, const char* flag) {
    if (value.empty()) throw Error(ErrorKind::BadInput, std::string("missing ") + flag);
}

Derivation derivation_of(const Ring& ring, const Options& o) {
    require(o.derivation, "--derivation");
    if (o.derivation == "canonical") return canonical_derivation(ring);
    return derivation_from_json(ring, load_json(o.derivation));
}

std::vector<RingElement> elements_or_generators(const Ring& ring, const Options& o) {
    if (!o.elements.empty()) return elements_from_json(ring, load_json(o.elements));
    std::vector<RingElement> out;
    for (std::uint32_t i = 0; i < ring.n(); ++i) out.push_back(ring.generator(i));
    return out;
}

std::vector<Derivation> derivations_of(const Ring& ring, const Options& o) {
    require(o.derivations, "--derivations");
    return derivations_from_json(ring, load_json(o.derivations));
}

Outcome ring_info(const Options& o) {
    const Ring& r = ring_of(o);
    Outcome out;
    out.report = {{"ring", to_json(r.spec())},
                  {"dimension", r.dimension()},
                  {"field_order", r.field().order()},
                  {"maximal_ideal_dimension", r.dimension() - 1},
                  {"maximal_ideal_nilpotency", r.n() * (r.p() - 1) + 1}};
    out.summary = "T_" + std::to_string(r.n()) + " over F_" + std::to_string(r.field().order()) + ": dimension " +
                  std::to_string(r.dimension());
    return out;
}

Outcome descent_build(const Options& o) {
    const Ring& r = ring_of(o);
    const Derivation d = derivation_of(r, o);
    Outcome out;
    std::vector<RingElement> witnesses;
    if (!o.witnesses.empty()) {
        witnesses = elements_from_json(r, load_json(o.witnesses));
    } else {
        std::uint32_t s = 0;
        if (o.exponent) {
            s = *o.exponent;
        } else {
            for (std::uint64_t pk = 1; s < r.n() && !is_zero(der_power(d, pk)); pk *= r.p()) ++s;
        }
        std::uint64_t pk = 1;
        for (std::uint32_t i = 0; i < s; ++i, pk *= r.p()) {
            auto y = unit_preimage(d, pk);
            if (!y) {
                out.verdict = false;
                out.report = {{"verdict", false}, {"missing_witness", i}, {"failure", "no y in the maximal ideal with d^(p^i)(y) = 1"}};
                out.summary = "no witness for i = " + std::to_string(i);
                return out;
            }
            witnesses.push_back(*y);
        }
    }
    const IterativeDescent seq = construct_descent(d, witnesses);
    out.report = {{"verdict", true}, {"descent", to_json(seq)}, {"witnesses", to_json(witnesses)}, {"sequence", to_json(seq.elements)}};
    out.summary = "iterative descent with pillars " + show_all(seq.pillars());
    return out;
}

Outcome descent_verify(const Options& o) {
    const Ring& r = ring_of(o);
    const Derivation d = derivation_of(r, o);
    require(o.descent, "--descent");
    const IterativeDescent seq = descent_from_json(r, load_json(o.descent));
    const DescentVerdict v = verify_iterative_descent(seq, d, o.exhaustive);
    Outcome out;
    out.verdict = v.ok;
    out.report = {{"verdict", v.ok}};
    if (!v.ok) out.report["failure"] = v.failure;
    out.summary = v.ok ? "iterative d-descent" : "not an iterative d-descent: " + v.failure;
    return out;
}

Outcome nsder_check(const Options& o) {
    const Ring& r = ring_of(o);
    const NsderVerdict v = is_nsder(derivation_of(r, o));
    Outcome out;
    out.verdict = v.is_nsder;
    out.report = {{"verdict", v.is_nsder}, {"witnesses", to_json(v.witnesses)}};
    out.report["nilpotency_index"] = v.nilpotency_index ? Json(*v.nilpotency_index) : Json(nullptr);
    if (v.descent) {
        out.report["pillars"] = to_json(v.descent->pillars());
        out.report["descent"] = to_json(*v.descent);
    }
    if (!v.is_nsder) out.report["failure"] = v.failure;
    if (v.missing_witness) out.report["missing_witness"] = *v.missing_witness;
    if (v.kernel_element) out.report["kernel_element"] = to_json(*v.kernel_element);
    out.summary = v.is_nsder ? "nsder, pillars " + show_all(v.descent->pillars()) : "not nsder: " + v.failure;
    return out;
}

Outcome kernel(const Options& o) {
    const Ring& r = ring_of(o);
    const Derivation d = derivation_of(r, o);
    const KernelBasis kb = kernel_basis(d);
    const bool is_field = nullspace(d.matrix().rightCols(d.matrix().cols() - 1)).cols() == 0;
    Outcome out;
    out.report = {{"fq_dimension", kb.over_fq.size()},
                  {"fp_dimension", kb.over_fp.size()},
                  {"basis", to_json(kb.over_fq)},
                  {"fp_basis", to_json(kb.over_fp)},
                  {"meets_maximal_ideal", !is_field}};
    out.summary = "ker d has dimension " + std::to_string(kb.over_fq.size()) + " over F_q";
    return out;
}

Outcome canonical(const Options& o) {
    const Ring& r = ring_of(o);
    const Frame f = canonical_frame(derivation_of(r, o));
    Outcome out;
    out.report = {{"frame", to_json(f)}};
    out.summary = "frame with generators " + show_all(f.generators);
    return out;
}

Outcome from_frame(const Options& o) {
    const Ring& r = ring_of(o);
    require(o.frame, "--frame");
    const Derivation d = derivation_from_frame(frame_from_json(r, load_json(o.frame)));
    Outcome out;
    out.report = {{"derivation", to_json(d)}};
    out.summary = "derivation with images " + show_all(d.images());
    return out;
}

Outcome orthogonalize_cmd(const Options& o) {
    const Ring& r = ring_of(o);
    const auto xs = elements_or_generators(r, o);
    const Orthogonalized res = orthogonalize(derivations_of(r, o), xs);
    const CompositeProjection cp = composite_projection(res.derivations, res.generators);
    Outcome out;
    out.report = {{"derivations", to_json(res.derivations)},
                  {"generators", to_json(res.generators)},
                  {"coefficient_field", to_json(cp.fp_basis)},
                  {"decomposition_rank", cp.decomposition_rank},
                  {"expected_rank", r.dimension() * r.m()}};
    out.summary = "orthogonal generators " + show_all(res.generators);
    return out;
}

Outcome cramer(const Options& o) {
    const Ring& r = ring_of(o);
    const CramerDuals c = cramer_duals(derivations_of(r, o), elements_or_generators(r, o));
    Outcome out;
    out.report = {{"duals", to_json(c.duals)}, {"coefficients", to_json(c.coefficients)}};
    out.summary = std::to_string(c.duals.size()) + " dual derivations";
    return out;
}

Outcome pairing(const Options& o) {
    const Ring& r = ring_of(o);
    const PairingReport p = pairing_report(derivations_of(r, o), elements_or_generators(r, o));
    Outcome out;
    out.verdict = p.perfect;
    out.report = {{"verdict", p.perfect},
                  {"residue", matrix_to_json(p.residue)},
                  {"rank", p.rank},
                  {"perfect", p.perfect},
                  {"endomorphism_rank", p.endomorphism_rank},
                  {"surjective", p.surjective}};
    out.summary = "pairing rank " + std::to_string(p.rank) + (p.perfect ? ", perfect" : ", not perfect");
    return out;
}

Outcome derbasis(const Options& o) {
    const Ring& r = ring_of(o);
    const DerBasisCertificate c = der_basis_check(derivation_of(r, o));
    Outcome out;
    out.verdict = c.verified;
    out.report = {{"verdict", c.verified},
                  {"matrix", to_json(c.matrix)},
                  {"determinant", to_json(c.determinant)},
                  {"inverse", to_json(c.inverse)},
                  {"duals", to_json(c.duals)}};
    out.summary = c.verified ? "the d^(p^i) form an R-basis of the derivations" : "certificate failed";
    return out;
}

Outcome simplicity_report(const Ring& r, const SimplicityVerdict& v) {
    Outcome out;
    out.verdict = v.simple;
    out.report = {{"verdict", v.simple}, {"elements_checked", v.elements_checked}};
    if (v.generator) {
        out.report["generator"] = to_json(*v.generator);
        out.report["ideal"] = to_json(columns_as_elements(r, v.ideal));
    }
    out.summary = v.simple ? "simple" : "proper stable ideal generated by " + show(*v.generator);
    return out;
}

Outcome oracle_simplicity(const Options& o) {
    const Ring& r = ring_of(o);
    return simplicity_report(r, simplicity_oracle(derivation_of(r, o)));
}

Outcome oracle_differential(const Options& o) {
    const Ring& r = ring_of(o);
    return simplicity_report(r, differential_simplicity_oracle(r));
}

Outcome conjugate_cmd(const Options& o) {
    const Ring& r = ring_of(o);
    const Derivation d = derivation_of(r, o);
    require(o.automorphism, "--automorphism");
    const RingAutomorphism sigma = automorphism_from_json(r, load_json(o.automorphism));
    const Derivation c = conjugate(sigma, d);
    const bool member = is_nsder(c).is_nsder;
    Outcome out;
    out.report = {{"derivation", to_json(c)}, {"nsder", member}};
    if (member && is_nsder(d).is_nsder) {
        const Frame f = canonical_frame(c);
        out.report["frame"] = to_json(f);
        out.report["equivariant"] = f == transport(sigma, canonical_frame(d));
    }
    out.summary = "conjugate with images " + show_all(c.images());
    return out;
}

Outcome selftest_cmd(const Options& o) {
    SelftestResult res = selftest(o.seed);
    Outcome out;
    out.verdict = res.passed;
    out.summary = "selftest: " + std::to_string(res.report["passed"].get<int>()) + " passed, " +
                  std::to_string(res.report["failed"].get<int>()) + " failed";
    out.report = std::move(res.report);
    return out;
}

void emit(const Options& o, const Json& report, std::ostream& out) {
    const std::string text = report.dump(2) + "\n";
    if (!o.output.empty()) {
        std::ofstream f(o.output);
        if (!f) throw Error(ErrorKind::BadInput, "cannot write " + o.output);
        f << text;
    } else if (o.format == "json") {
        out << text;
    }
}

// ---------------------------------------------------------------------------
// selftest

struct Check {
    std::string name;
    Config config;
    std::function<std::string(std::mt19937_64&)> body;
};

std::vector<RingElement> standard_generators(const Ring& r) {
    std::vector<RingElement> out;
    for (std::uint32_t i = 0; i < r.n(); ++i) out.push_back(r.generator(i));
    return out;
}

std::vector<Check> selftest_checks() {
    std::vector<Check> checks;
    checks.push_back({"lucas against the additive recurrence", {0, 0, 0}, [](std::mt19937_64&) -> std::string {
                          for (std::uint32_t p : {2u, 3u, 5u}) {
                              std::vector<std::uint32_t> row{1};
                              for (std::uint64_t i = 0; i < std::uint64_t{p} * p * p; ++i) {
                                  for (std::uint64_t j = 0; j <= i; ++j)
                                      if (lucas_binom(i, j, p) != row[j]) return "mismatch at p = " + std::to_string(p);
                                  std::vector<std::uint32_t> next(row.size() + 1, 0);
                                  for (std::size_t j = 0; j < next.size(); ++j)
                                      next[j] = ((j < row.size() ? row[j] : 0) + (j > 0 ? row[j - 1] : 0)) % p;
                                  row = std::move(next);
                              }
                          }
                          return {};
                      }});
    const std::vector<Config> configs = {{2, 1, 1}, {2, 1, 2}, {2, 1, 3}, {3, 1, 1}, {3, 1, 2}, {5, 1, 1}, {2, 2, 1}, {2, 2, 2}, {3, 2, 1}};
    for (const Config c : configs) {
        const Ring& r = Ring::make(c[0], c[1], c[2]);
        checks.push_back({"iterative law", c, [&r](std::mt19937_64&) -> std::string {
                              const auto v = verify_iterative_descent(sequence_from_pillars(r, standard_generators(r)),
                                                                      canonical_derivation(r), true);
                              return v.ok ? "" : v.failure;
                          }});
        checks.push_back({"frame round trip", c, [&r](std::mt19937_64& rng) -> std::string {
                              const Frame f = random_frame(r, rng);
                              const Derivation d = derivation_from_frame(f);
                              if (canonical_frame(d) != f) return "g(g^-1(frame)) != frame";
                              if (derivation_from_frame(canonical_frame(d)) != d) return "g^-1(g(d)) != d";
                              return {};
                          }});
        checks.push_back({"descent from witnesses", c, [&r](std::mt19937_64& rng) -> std::string {
                              const Frame f = random_frame(r, rng);
                              const NsderVerdict v = is_nsder(derivation_from_frame(f));
                              if (!v.is_nsder) return v.failure;
                              if (*v.nilpotency_index != r.dimension()) return "nilpotency index is not p^n";
                              if (v.descent->elements != sequence_from_pillars(r, f.generators).elements) {
                                  return "descent differs from the frame's divided powers";
                              }
                              return {};
                          }});
        checks.push_back({"coefficient field", c, [&r](std::mt19937_64& rng) -> std::string {
                              const auto cf = coefficient_field(random_nsder(r, rng));
                              return cf.fp_basis.size() == r.m() ? "" : "dim over F_p of ker d is not m";
                          }});
        checks.push_back({"Der basis", c, [&r](std::mt19937_64& rng) -> std::string {
                              return der_basis_check(random_nsder(r, rng)).verified ? "" : "certificate failed";
                          }});
        checks.push_back({"equivariance", c, [&r](std::mt19937_64& rng) -> std::string {
                              const Derivation d = random_nsder(r, rng);
                              const auto sigma = random_automorphism(r, rng);
                              return canonical_frame(conjugate(sigma, d)) == transport(sigma, canonical_frame(d))
                                         ? ""
                                         : "g(sigma d sigma^-1) != sigma g(d)";
                          }});
        checks.push_back({"single orbit", c, [&r](std::mt19937_64& rng) -> std::string {
                              const Derivation a = random_nsder(r, rng);
                              const Derivation b = random_nsder(r, rng);
                              const auto sigma = frame_transport(canonical_frame(a), canonical_frame(b));
                              return conjugate(sigma, a) == b ? "" : "frame transport does not conjugate";
                          }});
        checks.push_back({"Frobenius fixes d", c, [&r](std::mt19937_64& rng) -> std::string {
                              const auto fix = frobenius_fix_check(random_nsder(r, rng));
                              return fix.fixes_pillars && fix.fixes_derivation ? "" : "Frobenius does not fix d";
                          }});
        checks.push_back({"orthogonalize", c, [&r](std::mt19937_64& rng) -> std::string {
                              for (;;) {
                                  std::vector<Derivation> ds;
                                  for (std::uint32_t i = 0; i < r.n(); ++i) ds.push_back(random_derivation(r, rng));
                                  std::vector<RingElement> xs = random_frame(r, rng).generators;
                                  CramerDuals duals;
                                  try {
                                      duals = cramer_duals(ds, xs);
                                  } catch (const Error& e) {
                                      if (e.kind() == ErrorKind::NotAUnit) continue;
                                      throw;
                                  }
                                  const auto res = orthogonalize(duals.duals, xs);
                                  const auto cp = composite_projection(res.derivations, res.generators);
                                  if (cp.decomposition_rank != r.dimension() * r.m()) return "R is not the sum of k' x'^alpha";
                                  return pairing_report(ds, xs).perfect ? "" : "pairing is not perfect";
                              }
                          }});
    }
    return checks;
}

}  // namespace

SelftestResult selftest(std::uint64_t seed) {
    auto checks = selftest_checks();
    std::vector<std::size_t> order(checks.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::mt19937_64 shuffler(seed);
    std::shuffle(order.begin(), order.end(), shuffler);
    SelftestResult out;
    out.report = {{"seed", seed}, {"checks", Json::array()}};
    int passed = 0;
    int failed = 0;
    for (std::size_t idx : order) {
        const Check& c = checks[idx];
        std::seed_seq seq{seed, static_cast<std::uint64_t>(idx)};
        std::mt19937_64 rng(seq);
        std::string failure;
        try {
            failure = c.body(rng);
        } catch (const std::exception& e) {
            failure = std::string("threw: ") + e.what();
        }
        Json entry = {{"name", c.name}, {"passed", failure.empty()}};
        if (c.config[0] != 0) entry["config"] = {{"p", c.config[0]}, {"m", c.config[1]}, {"n", c.config[2]}};
        if (!failure.empty()) entry["failure"] = failure;
        out.report["checks"].push_back(entry);
        (failure.empty() ? passed : failed) += 1;
    }
    out.report["passed"] = passed;
    out.report["failed"] = failed;
    out.passed = failed == 0;
    return out;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Nilpotent simple derivations of truncated polynomial algebras", "nilderiv"};
    app.require_subcommand(1);
    Options o;
    std::vector<std::pair<CLI::App*, Handler>> leaves;

    auto leaf = [&](CLI::App* parent, const std::string& name, const std::string& desc, Handler h) {
        CLI::App* s = parent->add_subcommand(name, desc);
        s->add_option("--p", o.p, "characteristic");
        s->add_option("--m", o.m, "degree of F_q over F_p (default 1)");
        s->add_option("--n", o.n, "number of variables");
        s->add_option("--irr", o.irr, "irreducible polynomial, constant term first");
        s->add_option("--ring", o.ring, "RingSpec JSON (file or inline)");
        s->add_option("--format", o.format, "json or summary")->check(CLI::IsMember({"json", "summary"}));
        s->add_option("--output", o.output, "write the JSON report to this file");
        leaves.emplace_back(s, std::move(h));
        return s;
    };
    auto with_derivation = [&](CLI::App* s) {
        s->add_option("--derivation", o.derivation, "Derivation JSON (file or inline), or 'canonical'");
        return s;
    };
    auto with_family = [&](CLI::App* s) {
        s->add_option("--derivations", o.derivations, "JSON array of derivations");
        s->add_option("--elements", o.elements, "JSON array of elements (default: the generators)");
        return s;
    };

    CLI::App* ring = app.add_subcommand("ring", "ring information");
    ring->require_subcommand(1);
    leaf(ring, "info", "dimension and field data", ring_info);

    CLI::App* descent = app.add_subcommand("descent", "iterative descents");
    descent->require_subcommand(1);
    CLI::App* build = with_derivation(leaf(descent, "build", "build an iterative descent from witnesses", descent_build));
    build->add_option("--witnesses", o.witnesses, "JSON array of witnesses y_k");
    build->add_option("--exponent", o.exponent, "exponent when witnesses are searched for");
    CLI::App* verify = with_derivation(leaf(descent, "verify", "verify an iterative descent", descent_verify));
    verify->add_option("--descent", o.descent, "IterativeDescent JSON");
    verify->add_flag("--exhaustive", o.exhaustive, "also check every product and derivative");

    CLI::App* nsder = app.add_subcommand("nsder", "nilpotent simple derivations");
    nsder->require_subcommand(1);
    with_derivation(leaf(nsder, "check", "decide membership in nsder", nsder_check));

    with_derivation(leaf(&app, "kernel", "kernel of a derivation", kernel));
    with_derivation(leaf(&app, "canonical", "the frame of an nsder derivation", canonical));
    leaf(&app, "from-frame", "the nsder derivation of a frame", from_frame)->add_option("--frame", o.frame, "Frame JSON");
    with_family(leaf(&app, "orthogonalize", "commuting orthogonal derivations", orthogonalize_cmd));
    with_family(leaf(&app, "cramer", "dual derivations by Cramer's rule", cramer));
    with_family(leaf(&app, "pairing", "residue pairing with m/m^2", pairing));
    with_derivation(leaf(&app, "derbasis", "R-basis of derivations from p-powers", derbasis));

    CLI::App* oracle = app.add_subcommand("oracle", "exhaustive simplicity oracles");
    oracle->require_subcommand(1);
    with_derivation(leaf(oracle, "simplicity", "d-simplicity by ideal closure", oracle_simplicity));
    leaf(oracle, "differential", "differential simplicity by ideal closure", oracle_differential);

    CLI::App* conj = with_derivation(leaf(&app, "conjugate", "conjugate a derivation by an automorphism", conjugate_cmd));
    conj->add_option("--automorphism", o.automorphism, "RingAutomorphism JSON");

    CLI::App* self = app.add_subcommand("selftest", "randomized end-to-end checks");
    self->add_option("--seed", o.seed, "seed fixing the order and inputs");
    self->add_option("--format", o.format, "json or summary")->check(CLI::IsMember({"json", "summary"}));
    self->add_option("--output", o.output, "write the JSON report to this file");
    leaves.emplace_back(self, selftest_cmd);

    std::vector<std::string> argv_storage{"nilderiv"};
    argv_storage.insert(argv_storage.end(), args.begin(), args.end());
    std::vector<char*> argv;
    for (auto& a : argv_storage) argv.push_back(a.data());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, err) == 0 ? kExitTrue : kExitInput;
    }

    for (const auto& [sub, handler] : leaves) {
        if (!sub->parsed()) continue;
        try {
            const Outcome res = handler(o);
            emit(o, res.report, out);
            if (o.format == "summary") err << res.summary << "\n";
            return res.verdict ? kExitTrue : kExitFalse;
        } catch (const Error& e) {
            err << "error (" << to_string(e.kind()) << "): " << e.what() << "\n";
            if (o.format == "json") out << Json{{"error", std::string(to_string(e.kind()))}, {"message", e.what()}}.dump(2) << "\n";
            return kExitInput;
        }
    }
    err << "no command selected\n";
    return kExitInput;
}

}  // namespace nilderiv
