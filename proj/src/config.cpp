#include "bdm/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#define TOML_EXCEPTIONS 1
#define TOML_ENABLE_FORMATTERS 0
#include <toml.hpp>

#include "bdm/error.hpp"

namespace bdm {

namespace {

[[noreturn]] void fail(const std::string& what)
{
    throw Error(Errc::ConfigError, what);
}

// ---------------------------------------------------------------------------
// Echo emitter. Floats use the shortest representation that parses back to
// the same double; tables nested below a section are written inline.

std::string format_double(double v)
{
    if (std::isnan(v)) {
        return "nan";
    }
    if (std::isinf(v)) {
        return v > 0 ? "inf" : "-inf";
    }
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    std::string s(buf, res.ptr);
    if (s.find_first_of(".e") == std::string::npos) {
        s += ".0";
    }
    return s;
}

std::string quote(const std::string& s)
{
    std::string out = "\"";
    for (char c : s) {
        switch (c) {
        case '"': out += "\\\""; break;
        case '\\': out += "\\\\"; break;
        case '\n': out += "\\n"; break;
        case '\t': out += "\\t"; break;
        default:
            if (static_cast<unsigned char>(c) < 0x20) {
                char buf[8];
                std::snprintf(buf, sizeof buf, "\\u%04x", c);
                out += buf;
            } else {
                out += c;
            }
        }
    }
    return out + "\"";
}

std::string emit_inline(const toml::node& n);

std::string emit_inline_table(const toml::table& t)
{
    if (t.empty()) {
        return "{}";
    }
    std::string s = "{ ";
    bool first = true;
    for (auto&& [k, v] : t) {
        s += (first ? "" : ", ") + std::string(k.str()) + " = " + emit_inline(v);
        first = false;
    }
    return s + " }";
}

std::string emit_inline(const toml::node& n)
{
    if (auto v = n.as_string()) {
        return quote(v->get());
    }
    if (auto v = n.as_integer()) {
        return std::to_string(v->get());
    }
    if (auto v = n.as_floating_point()) {
        return format_double(v->get());
    }
    if (auto v = n.as_boolean()) {
        return v->get() ? "true" : "false";
    }
    if (auto a = n.as_array()) {
        if (a->empty()) {
            return "[]";
        }
        std::string s = "[ ";
        for (std::size_t i = 0; i < a->size(); ++i) {
            s += (i ? ", " : "") + emit_inline(*a->get(i));
        }
        return s + " ]";
    }
    if (auto t = n.as_table()) {
        return emit_inline_table(*t);
    }
    fail("value type not supported in the echo");
}

void emit_entries(std::ostringstream& os, const toml::table& t)
{
    for (auto&& [k, v] : t) {
        if (v.is_table()) {
            continue;
        }
        auto a = v.as_array();
        if (a && !a->empty() && a->get(0)->is_table()) {
            os << k.str() << " = [\n";
            for (auto&& e : *a) {
                os << "  " << emit_inline(e) << ",\n";
            }
            os << "]\n";
        } else {
            os << k.str() << " = " << emit_inline(v) << "\n";
        }
    }
}

std::string emit_document(const toml::table& doc, const std::vector<std::string>& section_order)
{
    std::ostringstream os;
    emit_entries(os, doc);
    for (const auto& name : section_order) {
        if (auto sec = doc[name].as_table()) {
            os << "\n[" << name << "]\n";
            emit_entries(os, *sec);
            for (auto&& [k, v] : *sec) {
                if (v.is_table()) {
                    os << k.str() << " = " << emit_inline(v) << "\n";
                }
            }
        }
    }
    return os.str();
}

// ---------------------------------------------------------------------------
// Strict reader: every key read is copied into the resolved document, and a
// section with keys left unread is rejected.

class Section {
  public:
    Section(std::string path, const toml::table* src, toml::table* out) : path_(std::move(path)), src_(src), out_(out)
    {
    }

    bool present() const noexcept { return src_ != nullptr; }
    bool has(const std::string& key) const { return src_ && src_->contains(key); }
    const std::string& path() const noexcept { return path_; }

    double number(const std::string& key, std::optional<double> def = std::nullopt)
    {
        double v;
        if (const toml::node* n = take(key)) {
            if (auto f = n->value_exact<double>()) {
                v = *f;
            } else if (auto i = n->value_exact<std::int64_t>()) {
                v = static_cast<double>(*i);
            } else {
                fail(where(key) + " must be a number");
            }
        } else if (def) {
            v = *def;
        } else {
            fail(where(key) + " is required");
        }
        out_->insert_or_assign(key, v);
        return v;
    }

    double positive(const std::string& key, std::optional<double> def = std::nullopt)
    {
        double v = number(key, def);
        if (!(v > 0) || !std::isfinite(v)) {
            fail(where(key) + " must be positive and finite");
        }
        return v;
    }

    double non_negative(const std::string& key, std::optional<double> def = std::nullopt)
    {
        double v = number(key, def);
        if (!(v >= 0) || !std::isfinite(v)) {
            fail(where(key) + " must be non-negative and finite");
        }
        return v;
    }

    std::int64_t integer(const std::string& key, std::optional<std::int64_t> def = std::nullopt)
    {
        std::int64_t v;
        if (const toml::node* n = take(key)) {
            auto i = n->value_exact<std::int64_t>();
            if (!i) {
                fail(where(key) + " must be an integer");
            }
            v = *i;
        } else if (def) {
            v = *def;
        } else {
            fail(where(key) + " is required");
        }
        out_->insert_or_assign(key, v);
        return v;
    }

    std::size_t count(const std::string& key, std::optional<std::size_t> def = std::nullopt, std::size_t min = 0)
    {
        std::int64_t v = def ? integer(key, static_cast<std::int64_t>(*def)) : integer(key);
        if (v < static_cast<std::int64_t>(min)) {
            fail(where(key) + " must be at least " + std::to_string(min));
        }
        return static_cast<std::size_t>(v);
    }

    std::optional<std::size_t> optional_count(const std::string& key)
    {
        if (!has(key)) {
            return std::nullopt;
        }
        return count(key);
    }

    void set_count(const std::string& key, std::size_t v) { out_->insert_or_assign(key, static_cast<std::int64_t>(v)); }

    bool flag(const std::string& key, bool def)
    {
        bool v = def;
        if (const toml::node* n = take(key)) {
            auto b = n->value_exact<bool>();
            if (!b) {
                fail(where(key) + " must be a boolean");
            }
            v = *b;
        }
        out_->insert_or_assign(key, v);
        return v;
    }

    std::string word(const std::string& key, const std::string& def, std::initializer_list<const char*> allowed)
    {
        std::string v = def;
        if (const toml::node* n = take(key)) {
            auto s = n->value_exact<std::string>();
            if (!s) {
                fail(where(key) + " must be a string");
            }
            v = *s;
        }
        std::string options;
        for (const char* a : allowed) {
            if (v == a) {
                out_->insert_or_assign(key, v);
                return v;
            }
            options += std::string(options.empty() ? "" : ", ") + a;
        }
        fail(where(key) + " = \"" + v + "\" is not one of: " + options);
    }

    std::string text(const std::string& key)
    {
        const toml::node* n = take(key);
        auto s = n ? n->value_exact<std::string>() : std::nullopt;
        if (!s) {
            fail(where(key) + " must be a string");
        }
        out_->insert_or_assign(key, *s);
        return *s;
    }

    std::vector<double> numbers(const std::string& key, std::optional<std::vector<double>> def = std::nullopt)
    {
        std::vector<double> v;
        if (const toml::node* n = take(key)) {
            v = to_numbers(*n, where(key));
        } else if (def) {
            v = *def;
        } else {
            fail(where(key) + " is required");
        }
        toml::array a;
        for (double x : v) {
            a.push_back(x);
        }
        out_->insert_or_assign(key, std::move(a));
        return v;
    }

    std::vector<std::vector<double>> points(const std::string& key, std::vector<std::vector<double>> def)
    {
        std::vector<std::vector<double>> v = std::move(def);
        if (const toml::node* n = take(key)) {
            auto arr = n->as_array();
            if (!arr) {
                fail(where(key) + " must be an array of points");
            }
            v.clear();
            for (auto&& p : *arr) {
                v.push_back(to_numbers(p, where(key)));
            }
        }
        toml::array a;
        for (const auto& p : v) {
            toml::array q;
            for (double x : p) {
                q.push_back(x);
            }
            a.push_back(std::move(q));
        }
        out_->insert_or_assign(key, std::move(a));
        return v;
    }

    /// Child table (inline or standard); absent children resolve from defaults.
    Section child(const std::string& key)
    {
        const toml::table* sub = nullptr;
        if (const toml::node* n = take(key)) {
            sub = n->as_table();
            if (!sub) {
                fail(where(key) + " must be a table");
            }
        }
        auto [it, _] = out_->insert_or_assign(key, toml::table{});
        return Section(path_ + "." + key, sub, it->second.as_table());
    }

    /// Elements of an array of tables.
    std::vector<const toml::table*> table_array(const std::string& key)
    {
        std::vector<const toml::table*> v;
        if (const toml::node* n = take(key)) {
            auto arr = n->as_array();
            if (!arr) {
                fail(where(key) + " must be an array of tables");
            }
            for (auto&& e : *arr) {
                if (!e.as_table()) {
                    fail(where(key) + " must be an array of tables");
                }
                v.push_back(e.as_table());
            }
        }
        return v;
    }

    void finish() const
    {
        if (!src_) {
            return;
        }
        for (auto&& [k, _] : *src_) {
            if (!used_.count(std::string(k.str()))) {
                fail("unknown key " + where(std::string(k.str())));
            }
        }
    }

  private:
    std::string where(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

    const toml::node* take(const std::string& key)
    {
        used_.insert(key);
        return src_ ? src_->get(key) : nullptr;
    }

    static std::vector<double> to_numbers(const toml::node& n, const std::string& where)
    {
        auto arr = n.as_array();
        if (!arr) {
            fail(where + " must be an array of numbers");
        }
        std::vector<double> v;
        for (auto&& e : *arr) {
            if (auto f = e.value_exact<double>()) {
                v.push_back(*f);
            } else if (auto i = e.value_exact<std::int64_t>()) {
                v.push_back(static_cast<double>(*i));
            } else {
                fail(where + " must be an array of numbers");
            }
        }
        return v;
    }

    std::string path_;
    const toml::table* src_;
    toml::table* out_;
    std::set<std::string> used_;
};

// ---------------------------------------------------------------------------
// Model pieces

DomainPtr resolve_domain(Section s)
{
    if (!s.present()) {
        fail("missing [domain] section");
    }
    std::string kind = s.word("kind", "box", {"box", "unbounded"});
    DomainPtr d;
    try {
        if (kind == "box") {
            auto lo = s.numbers("lower");
            auto hi = s.numbers("upper");
            d = make_domain(Domain::box(lo, hi));
        } else {
            d = make_domain(Domain::unbounded(s.count("dim", std::nullopt, 1)));
        }
    } catch (const Error& e) {
        if (e.code() == Errc::ConfigError) {
            throw;
        }
        fail(std::string("[domain]: ") + e.what());
    }
    s.finish();
    return d;
}

struct PotentialSettings {
    GibbsPotential potential;
    QuadratureSpec quad;
};

PotentialSettings resolve_potential(Section s, const Domain& w)
{
    double a = s.number("activity", 0.0);
    std::string pair = s.word("pair", "zero", {"zero", "lennard_jones", "riesz", "soft_core", "strauss"});
    PairPotential phi;
    try {
        if (pair == "lennard_jones") {
            phi = PairPotential::lennard_jones(s.number("c"));
        } else if (pair == "riesz") {
            double c = s.number("c");
            double alpha = s.number("alpha");
            phi = PairPotential::riesz(c, alpha, s.count("dim", w.dim(), 1));
        } else if (pair == "soft_core") {
            phi = PairPotential::soft_core(s.number("c"));
        } else if (pair == "strauss") {
            double g = s.number("gamma");
            double r = s.number("range");
            phi = PairPotential::strauss(g, r, s.number("eps"));
        }
    } catch (const Error& e) {
        if (e.code() == Errc::ConfigError) {
            throw;
        }
        fail(std::string("[potential]: ") + e.what());
    }
    QuadratureSpec quad{s.count("quadrature_cells", 128, 1)};
    s.finish();
    return {GibbsPotential(a, phi), quad};
}

GibbsNormalisation resolve_normalisation(Section& s)
{
    return s.word("normalisation", "n_plus_1", {"n_plus_1", "n_max_1"}) == "n_plus_1" ? GibbsNormalisation::NPlusOne
                                                                                       : GibbsNormalisation::NMaxOne;
}

IntensitySpec resolve_intensities(Section s, const PotentialSettings& pot)
{
    if (!s.present()) {
        fail("missing [intensities] section");
    }
    double astar = s.positive("alpha_star");
    BirthIntensity birth;
    if (s.word("birth", "constant", {"constant", "gibbs"}) == "constant") {
        double rate = s.non_negative("birth_rate", 1.0);
        birth = ConstantBirth{rate, s.optional_count("birth_cutoff")};
    } else {
        birth = GibbsBirthIntensity{pot.potential, pot.quad, resolve_normalisation(s)};
    }
    DeathIntensity death;
    if (s.word("death", "constant", {"constant", "linear"}) == "constant") {
        death = ConstantDeath{s.non_negative("death_rate", 1.0)};
    } else {
        double rate = s.non_negative("death_rate", 1.0);
        death = LinearDeath{rate, s.count("death_cap", 10000, 1)};
    }
    s.finish();
    return IntensitySpec(std::move(birth), std::move(death), astar);
}

RadialFunction resolve_radial(Section s, RadialFunction def)
{
    const char* def_kind = def.kind == RadialFunction::Kind::Constant ? "constant"
                           : def.kind == RadialFunction::Kind::Power  ? "power"
                                                                      : "exp_decay";
    std::string kind = s.word("kind", def_kind, {"constant", "power", "exp_decay"});
    RadialFunction f;
    if (kind == "constant") {
        f = RadialFunction::constant(s.number("coef", def.coef));
    } else if (kind == "power") {
        double c = s.number("coef", def.coef);
        f = RadialFunction::power(c, s.number("shape", def.shape));
    } else {
        double c = s.number("coef", def.coef);
        f = RadialFunction::exp_decay(c, s.positive("shape", def.shape));
    }
    s.finish();
    return f;
}

BirthKernel resolve_birth(Section s, const PotentialSettings& pot)
{
    std::string kind = s.word("kernel", "uniform", {"uniform", "mixture", "gibbs"});
    BirthKernel::Kind k = UniformBirth{};
    if (kind == "mixture") {
        double sigma = s.positive("sigma", 0.1);
        RadialFunction phi1 = resolve_radial(s.child("phi1"), RadialFunction::constant(0.0));
        RadialFunction phi2 = resolve_radial(s.child("phi2"), RadialFunction::constant(0.0));
        k = MixtureBirth{sigma, phi1, phi2};
    } else if (kind == "gibbs") {
        k = GibbsBirthKernel{pot.potential};
    }
    std::size_t budget = s.count("max_proposals", 1000000, 1);
    s.finish();
    return BirthKernel(std::move(k), budget);
}

DeathKernel resolve_death(Section s)
{
    DeathKernel::Kind k = UniformDeath{};
    if (s.word("kernel", "uniform", {"uniform", "weighted"}) == "weighted") {
        k = WeightedDeath{resolve_radial(s.child("g"), RadialFunction::exp_decay(1.0, 0.3))};
    }
    s.finish();
    return DeathKernel(std::move(k));
}

MoverSpec resolve_mover(Section s, const PotentialSettings& pot)
{
    std::string kind = s.word("kind", "constant", {"constant", "langevin", "reflected_brownian", "growth"});
    double step = s.positive("step", 1e-3);
    double taming = s.non_negative("taming", 1.0);
    MoverSpec::Kind k = ConstantMove{};
    if (kind == "langevin") {
        k = LangevinMove{pot.potential.pair(), s.positive("inv_temp", 2.0)};
    } else if (kind == "reflected_brownian") {
        k = ReflectedBrownianMove{s.positive("inv_temp", 1.0)};
    } else if (kind == "growth") {
        std::string law = s.word("law", "constant", {"constant", "logistic", "competition"});
        double kappa = s.number("kappa", 1.0);
        double cap = s.positive("capacity", 1.0);
        k = GrowthMove{law == "constant"   ? GrowthLaw::Constant
                       : law == "logistic" ? GrowthLaw::Logistic
                                           : GrowthLaw::Competition,
                       kappa, cap};
    }
    s.finish();
    try {
        return MoverSpec(std::move(k), step, taming);
    } catch (const Error& e) {
        fail(std::string("[mover]: ") + e.what());
    }
}

PowerLaw resolve_power_law(Section s)
{
    double c = s.non_negative("coef");
    double shift = s.number("shift", 0.0);
    PowerLaw p{c, shift, s.number("power", 0.0)};
    s.finish();
    return p;
}

ChainSettings resolve_chain(Section s, const std::optional<ModelSpec>& model)
{
    ChainSettings cs;
    std::string family =
        s.word("family", "dominating", {"dominating", "constant", "mm_infinity", "gibbs_envelope", "explicit"});
    try {
        if (family == "dominating") {
            if (!model) {
                fail("[chain].family = \"dominating\" needs a model ([domain] and [intensities])");
            }
            cs.chain = SimpleChainSpec::dominating(model->intensities, *model->domain);
        } else if (family == "constant" || family == "mm_infinity") {
            double lambda = s.non_negative("lambda");
            double mu = s.non_negative("mu");
            cs.chain = family == "constant" ? SimpleChainSpec::constant(lambda, mu)
                                            : SimpleChainSpec::mm_infinity(lambda, mu);
        } else if (family == "gibbs_envelope") {
            double b = s.non_negative("b");
            cs.chain = SimpleChainSpec::gibbs_envelope(b, resolve_normalisation(s));
        } else {
            auto beta = s.numbers("beta");
            cs.chain = SimpleChainSpec::explicit_arrays(beta, s.numbers("delta"));
            if (s.has("beta_tail")) {
                cs.chain.beta_tail = resolve_power_law(s.child("beta_tail"));
            }
            if (s.has("delta_tail")) {
                cs.chain.delta_tail = resolve_power_law(s.child("delta_tail"));
            }
        }
        if (auto cut = s.optional_count("cutoff")) {
            cs.chain = cs.chain.with_cutoff(*cut);
        }
        cs.chain.validate();
    } catch (const Error& e) {
        if (e.code() == Errc::ConfigError) {
            throw;
        }
        fail(std::string("[chain]: ") + e.what());
    }
    cs.gamma = s.numbers("gamma", std::vector<double>{1.0});
    cs.n_probe = s.count("n_probe", 1000, 1);
    s.finish();
    return cs;
}

void check_times(const std::vector<double>& ts, double horizon, const std::string& where)
{
    for (double t : ts) {
        if (!(t >= 0) || !(t <= horizon)) {
            fail(where + " entries must lie in [0, horizon]");
        }
    }
}

RunSettings resolve_run(Section s, const Overrides& ov, Command cmd)
{
    RunSettings r;
    r.horizon = s.positive("horizon", r.horizon);
    r.checkpoints = s.numbers("checkpoints", std::vector<double>{});
    check_times(r.checkpoints, r.horizon, "[run].checkpoints");
    r.trials = s.count("trials", r.trials, 1);
    if (ov.trials && (cmd == Command::Simulate || cmd == Command::Couple)) {
        r.trials = *ov.trials;
        s.set_count("trials", r.trials);
    }
    r.initial = s.points("initial", {});
    r.n0 = s.count("n0", r.initial.size());
    r.times = s.numbers("times", r.times);
    for (double t : r.times) {
        if (!(t >= 0) || !std::isfinite(t)) {
            fail("[run].times entries must be non-negative");
        }
    }
    r.log_trajectories = s.count("log_trajectories", r.log_trajectories);
    r.state_budget = s.count("state_budget", r.state_budget);
    r.validate = s.flag("validate", r.validate);
    r.validate_probes = s.count("validate_probes", r.validate_probes, 1);
    r.validate_max_count = s.count("validate_max_count", r.validate_max_count);
    s.finish();
    return r;
}

GibbsSettings resolve_gibbs(Section s, const Overrides& ov)
{
    GibbsSettings g;
    g.burn_in = s.non_negative("burn_in", g.burn_in);
    g.samples = s.count("samples", g.samples, 1);
    if (ov.trials) {
        g.samples = *ov.trials;
        s.set_count("samples", g.samples);
    }
    auto& o = g.options;
    o.chains = s.count("chains", o.chains, 1);
    o.spacing = s.positive("spacing", o.spacing);
    o.tv_threshold = s.positive("tv_threshold", o.tv_threshold);
    o.ks_threshold = s.positive("ks_threshold", o.ks_threshold);
    o.oracle_vs_oracle = s.flag("oracle_vs_oracle", o.oracle_vs_oracle);
    o.oracle_samples = s.count("oracle_samples", 4 * g.samples, 1);
    o.oracle.burn_in = s.count("oracle_burn_in", o.oracle.burn_in);
    o.oracle.thin = s.count("oracle_thin", o.oracle.thin, 1);
    s.finish();
    return g;
}

TestFunction resolve_test_function(Section s)
{
    std::string kind = s.word("kind", "count_indicator", {"count_indicator", "count_exponential", "smooth_cylinder"});
    TestFunction f;
    if (kind == "count_indicator") {
        f = CountIndicator{s.count("k", 0)};
    } else if (kind == "count_exponential") {
        f = CountExponential{s.number("theta", 1.0)};
    } else {
        double theta = s.number("theta", 0.5);
        f = SmoothCylinder{theta, s.positive("width", 0.5)};
    }
    s.finish();
    return f;
}

} // namespace

// ---------------------------------------------------------------------------

const char* command_name(Command c) noexcept
{
    switch (c) {
    case Command::Simulate: return "simulate";
    case Command::Couple: return "couple";
    case Command::CheckErgodicity: return "check-ergodicity";
    case Command::GibbsValidate: return "gibbs-validate";
    case Command::Diagnose: return "diagnose";
    }
    return "?";
}

std::optional<Command> parse_command(std::string_view name) noexcept
{
    for (Command c : {Command::Simulate, Command::Couple, Command::CheckErgodicity, Command::GibbsValidate,
                      Command::Diagnose}) {
        if (name == command_name(c)) {
            return c;
        }
    }
    return std::nullopt;
}

std::uint64_t fnv1a(std::string_view text) noexcept
{
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

Configuration RunConfig::initial_state() const
{
    if (!model) {
        throw Error(Errc::ConfigError, "no model configured");
    }
    try {
        return Configuration::from_points(model->domain, run.initial);
    } catch (const Error& e) {
        throw Error(Errc::ConfigError, std::string("[run].initial: ") + e.what());
    }
}

RunConfig resolve_config(std::string_view toml_text, Command command, const Overrides& ov)
{
    toml::table doc;
    try {
        doc = toml::parse(toml_text);
    } catch (const toml::parse_error& e) {
        std::ostringstream os;
        os << "TOML parse error at line " << e.source().begin.line << ": " << e.description();
        fail(os.str());
    }

    RunConfig rc;
    rc.command = command;
    toml::table out;
    Section top("", &doc, &out);

    rc.schema_version = top.integer("schema_version", 1);
    if (rc.schema_version != 1) {
        fail("unsupported schema_version " + std::to_string(rc.schema_version));
    }
    // Seeds above 2^63 - 1 do not fit a TOML integer and are written as strings.
    if (const toml::node* n = doc.get("seed")) {
        if (auto i = n->value_exact<std::int64_t>(); i && *i >= 0) {
            rc.seed = static_cast<std::uint64_t>(*i);
        } else if (auto s = n->value_exact<std::string>()) {
            auto res = std::from_chars(s->data(), s->data() + s->size(), rc.seed);
            if (res.ec != std::errc{} || res.ptr != s->data() + s->size()) {
                fail("seed must be a non-negative integer");
            }
        } else {
            fail("seed must be a non-negative integer");
        }
    }
    if (ov.seed) {
        rc.seed = *ov.seed;
    }
    if (rc.seed <= static_cast<std::uint64_t>(std::numeric_limits<std::int64_t>::max())) {
        out.insert_or_assign("seed", static_cast<std::int64_t>(rc.seed));
    } else {
        out.insert_or_assign("seed", std::to_string(rc.seed));
    }

    auto section = [&](const std::string& name) {
        const toml::node* n = doc.get(name);
        if (n && !n->is_table()) {
            fail("[" + name + "] must be a table");
        }
        auto [it, _] = out.insert_or_assign(name, toml::table{});
        return Section(name, n ? n->as_table() : nullptr, it->second.as_table());
    };

    const bool needs_model = command != Command::CheckErgodicity;
    const bool model_given = doc.contains("domain");
    const std::vector<std::string> model_sections{"domain", "potential", "intensities", "birth", "death", "mover", "run"};
    std::optional<PotentialSettings> pot;

    if (needs_model || model_given) {
        DomainPtr w = resolve_domain(section("domain"));
        pot = resolve_potential(section("potential"), *w);
        IntensitySpec intens = resolve_intensities(section("intensities"), *pot);
        BirthKernel bk = resolve_birth(section("birth"), *pot);
        DeathKernel dk = resolve_death(section("death"));
        MoverSpec mv = resolve_mover(section("mover"), *pot);
        rc.model = ModelSpec{w, std::move(intens), std::move(bk), std::move(dk), std::move(mv)};
        rc.run = resolve_run(section("run"), ov, command);
        rc.initial_state();
    } else {
        for (const auto& name : model_sections) {
            if (doc.contains(name)) {
                fail("[" + name + "] needs a [domain] section");
            }
        }
    }

    if (doc.contains("chain") || command == Command::Couple || command == Command::CheckErgodicity) {
        rc.chain = resolve_chain(section("chain"), rc.model);
    }

    if (doc.contains("gibbs") || command == Command::GibbsValidate) {
        rc.gibbs = resolve_gibbs(section("gibbs"), ov);
    }

    if (doc.contains("diagnose") || command == Command::Diagnose) {
        Section s = section("diagnose");
        DiagnoseSettings d;
        d.h = s.positive("h", d.h);
        d.generator_trials = s.count("generator_trials", d.generator_trials, 2);
        d.domination_trials = s.count("domination_trials", d.domination_trials, 1);
        if (ov.trials && command == Command::Diagnose) {
            d.generator_trials = std::max<std::size_t>(*ov.trials, 2);
            d.domination_trials = *ov.trials;
            s.set_count("generator_trials", d.generator_trials);
            s.set_count("domination_trials", d.domination_trials);
        }
        d.domination_times = s.numbers("domination_times", d.domination_times);
        d.point = s.points("point", rc.run.initial);

        // Absent means the default matrix; an explicit empty list is kept empty.
        toml::array fns_out;
        if (!s.has("test_functions")) {
            d.test_functions = {CountIndicator{1}, CountExponential{1.0}, SmoothCylinder{}};
            for (const auto& f : d.test_functions) {
                toml::table t;
                Section fs("diagnose.test_functions", nullptr, &t);
                if (auto* ci = std::get_if<CountIndicator>(&f)) {
                    fs.word("kind", "count_indicator", {"count_indicator"});
                    fs.count("k", ci->k);
                } else if (auto* ce = std::get_if<CountExponential>(&f)) {
                    fs.word("kind", "count_exponential", {"count_exponential"});
                    fs.number("theta", ce->theta);
                } else {
                    auto sc = std::get<SmoothCylinder>(f);
                    fs.word("kind", "smooth_cylinder", {"smooth_cylinder"});
                    fs.number("theta", sc.theta);
                    fs.number("width", sc.width);
                }
                fns_out.push_back(std::move(t));
            }
        } else {
            for (const toml::table* t : s.table_array("test_functions")) {
                toml::table resolved;
                d.test_functions.push_back(resolve_test_function(Section("diagnose.test_functions", t, &resolved)));
                fns_out.push_back(std::move(resolved));
            }
        }

        toml::array variants_out;
        if (rc.model) {
            d.variants.push_back({"base", *rc.model});
            for (const toml::table* t : s.table_array("variants")) {
                toml::table resolved;
                Section vs("diagnose.variants", t, &resolved);
                DiagnoseVariant v{vs.text("name"), *rc.model};
                if (vs.has("intensities")) {
                    v.model.intensities = resolve_intensities(vs.child("intensities"), *pot);
                }
                if (vs.has("birth")) {
                    v.model.birth = resolve_birth(vs.child("birth"), *pot);
                }
                if (vs.has("death")) {
                    v.model.death = resolve_death(vs.child("death"));
                }
                if (vs.has("mover")) {
                    v.model.mover = resolve_mover(vs.child("mover"), *pot);
                }
                vs.finish();
                d.variants.push_back(std::move(v));
                variants_out.push_back(std::move(resolved));
            }
        }
        s.finish();
        auto* sec = out["diagnose"].as_table();
        sec->insert_or_assign("test_functions", std::move(fns_out));
        if (!variants_out.empty()) {
            sec->insert_or_assign("variants", std::move(variants_out));
        }
        rc.diagnose = std::move(d);
    }

    std::set<std::string> known{"schema_version", "seed",  "domain", "potential", "intensities", "birth",
                                "death",          "mover", "run",    "chain",     "gibbs",       "diagnose"};
    for (auto&& [k, _] : doc) {
        if (!known.count(std::string(k.str()))) {
            fail("unknown key " + std::string(k.str()));
        }
    }
    for (const char* name : {"gibbs", "diagnose", "chain"}) {
        if (auto t = out[name].as_table(); t && t->empty()) {
            out.erase(name);
        }
    }

    rc.echo = emit_document(out, {"domain", "potential", "intensities", "birth", "death", "mover", "run", "chain",
                                  "gibbs", "diagnose"});
    char hex[17];
    std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(fnv1a(rc.echo)));
    rc.model_hash = hex;
    return rc;
}

RunConfig load_config(const std::string& path, Command command, const Overrides& overrides)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error(Errc::ConfigError, "cannot read config file '" + path + "'");
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return resolve_config(ss.str(), command, overrides);
}

} // namespace bdm
