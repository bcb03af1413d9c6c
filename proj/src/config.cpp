#include "acyc/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <json.hpp>
#include <set>
#include <sstream>

#include "acyc/ksolenoid.hpp"

namespace acyc {
namespace {

using json = nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw ConfigError(path + ": " + what);
}

std::string join(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

void expectObject(const json& j, const std::string& path) {
  if (!j.is_object()) fail(path, "expected an object");
}

void checkKeys(const json& j, const std::string& path, const std::set<std::string>& allowed) {
  expectObject(j, path);
  for (const auto& item : j.items())
    if (!allowed.count(item.key())) fail(join(path, item.key()), "unknown field");
}

const json* opt(const json& j, const std::string& key) {
  auto it = j.find(key);
  return it == j.end() ? nullptr : &*it;
}

const json& require(const json& j, const std::string& key, const std::string& path) {
  auto it = j.find(key);
  if (it == j.end()) fail(path, "missing required field '" + key + "'");
  return *it;
}

double getDouble(const json& j, const std::string& path) {
  if (!j.is_number()) fail(path, "expected a number");
  return j.get<double>();
}

long long getInt(const json& j, const std::string& path) {
  if (!j.is_number_integer()) fail(path, "expected an integer");
  return j.get<long long>();
}

bool getBool(const json& j, const std::string& path) {
  if (!j.is_boolean()) fail(path, "expected a boolean");
  return j.get<bool>();
}

std::string getString(const json& j, const std::string& path) {
  if (!j.is_string()) fail(path, "expected a string");
  return j.get<std::string>();
}

Vec getVec(const json& j, const std::string& path) {
  if (!j.is_array() || j.empty()) fail(path, "expected a non-empty number array");
  Vec v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i)
    v[static_cast<Eigen::Index>(i)] = getDouble(j[i], path + "[" + std::to_string(i) + "]");
  return v;
}

IVec getIVec(const json& j, const std::string& path) {
  if (!j.is_array() || j.empty()) fail(path, "expected a non-empty integer array");
  IVec v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i)
    v[static_cast<Eigen::Index>(i)] = getInt(j[i], path + "[" + std::to_string(i) + "]");
  return v;
}

std::vector<double> getDoubleList(const json& j, const std::string& path) {
  if (!j.is_array()) fail(path, "expected a number array");
  std::vector<double> out;
  for (std::size_t i = 0; i < j.size(); ++i)
    out.push_back(getDouble(j[i], path + "[" + std::to_string(i) + "]"));
  return out;
}

std::vector<int> getIntList(const json& j, const std::string& path) {
  if (!j.is_array()) fail(path, "expected an integer array");
  std::vector<int> out;
  for (std::size_t i = 0; i < j.size(); ++i)
    out.push_back(static_cast<int>(getInt(j[i], path + "[" + std::to_string(i) + "]")));
  return out;
}

// frequency vectors appear as a scalar (circle) or an integer array
Eigen::VectorXi getFreq(const json& j, const std::string& path) {
  if (j.is_number_integer()) {
    Eigen::VectorXi k(1);
    k[0] = static_cast<int>(j.get<long long>());
    return k;
  }
  if (!j.is_array() || j.empty()) fail(path, "expected an integer or integer array");
  Eigen::VectorXi k(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i)
    k[static_cast<Eigen::Index>(i)] =
        static_cast<int>(getInt(j[i], path + "[" + std::to_string(i) + "]"));
  return k;
}

std::vector<TrigTerm> parseTrigTerms(const json& j, const std::string& path) {
  if (!j.is_array()) fail(path, "expected an array of trig terms");
  std::vector<TrigTerm> terms;
  for (std::size_t i = 0; i < j.size(); ++i) {
    std::string p = path + "[" + std::to_string(i) + "]";
    checkKeys(j[i], p, {"freq", "cos", "sin"});
    TrigTerm t;
    t.freq = getFreq(require(j[i], "freq", p), join(p, "freq"));
    if (const json* c = opt(j[i], "cos")) t.cosAmp = getDouble(*c, join(p, "cos"));
    if (const json* s = opt(j[i], "sin")) t.sinAmp = getDouble(*s, join(p, "sin"));
    terms.push_back(std::move(t));
  }
  return terms;
}

GeometryConfig parseGeometry(const json& j, const std::string& path) {
  checkKeys(j, path, {"dim", "gram", "conformal"});
  GeometryConfig g;
  g.dim = static_cast<int>(getInt(require(j, "dim", path), join(path, "dim")));
  if (g.dim < 1 || g.dim > 8) fail(join(path, "dim"), "expected 1 <= dim <= 8");
  if (const json* gram = opt(j, "gram")) {
    const std::string gp = join(path, "gram");
    if (!gram->is_array() || static_cast<int>(gram->size()) != g.dim)
      fail(gp, "expected " + std::to_string(g.dim) + " rows");
    g.gram.resize(g.dim, g.dim);
    for (int r = 0; r < g.dim; ++r) {
      Vec row = getVec((*gram)[static_cast<std::size_t>(r)], gp + "[" + std::to_string(r) + "]");
      if (row.size() != g.dim)
        fail(gp + "[" + std::to_string(r) + "]", "expected " + std::to_string(g.dim) + " entries");
      g.gram.row(r) = row.transpose();
    }
  }
  if (const json* con = opt(j, "conformal")) {
    const std::string cp = join(path, "conformal");
    if (!con->is_array()) fail(cp, "expected an array");
    for (std::size_t i = 0; i < con->size(); ++i) {
      std::string p = cp + "[" + std::to_string(i) + "]";
      checkKeys((*con)[i], p, {"freq", "amp"});
      ConformalTerm t;
      t.freq = getFreq(require((*con)[i], "freq", p), join(p, "freq"));
      if (t.freq.size() != g.dim) fail(join(p, "freq"), "expected dim " + std::to_string(g.dim));
      t.amp = getDouble(require((*con)[i], "amp", p), join(p, "amp"));
      g.conformal.push_back(std::move(t));
    }
  }
  return g;
}

std::vector<std::vector<PerturbTerm>> parsePerturbTerms(const json& j, const std::string& path,
                                                        int dim) {
  if (!j.is_array() || static_cast<int>(j.size()) != dim)
    fail(path, "expected one term list per coordinate (" + std::to_string(dim) + ")");
  std::vector<std::vector<PerturbTerm>> out;
  for (std::size_t c = 0; c < j.size(); ++c) {
    std::string cp = path + "[" + std::to_string(c) + "]";
    if (!j[c].is_array()) fail(cp, "expected an array of terms");
    std::vector<PerturbTerm> comp;
    for (std::size_t i = 0; i < j[c].size(); ++i) {
      std::string p = cp + "[" + std::to_string(i) + "]";
      checkKeys(j[c][i], p, {"omega", "amp", "phase"});
      PerturbTerm t{};
      t.omega = getDouble(require(j[c][i], "omega", p), join(p, "omega"));
      t.amp = getDouble(require(j[c][i], "amp", p), join(p, "amp"));
      t.phase = 0.0;
      if (const json* ph = opt(j[c][i], "phase")) t.phase = getDouble(*ph, join(p, "phase"));
      comp.push_back(t);
    }
    out.push_back(std::move(comp));
  }
  return out;
}

CurveConfig parseCurve(const json& j, const std::string& path, const std::string& subcommand) {
  expectObject(j, path);
  CurveConfig c;
  c.type = getString(require(j, "type", path), join(path, "type"));

  std::set<std::string> allowedTypes;
  if (subcommand == "asymptotic")
    allowedTypes = {"linearFlow", "loop", "flow"};
  else if (subcommand == "cluster")
    allowedTypes = {"linearFlow", "loop", "flow", "counterexample", "oscillator"};
  else
    allowedTypes = {"counterexample"};
  if (!allowedTypes.count(c.type))
    fail(join(path, "type"), "subject type '" + c.type + "' not valid for " + subcommand);

  if (c.type == "linearFlow" || c.type == "flow") {
    if (c.type == "linearFlow") {
      checkKeys(j, path, {"type", "velocity", "x0", "arcLength", "perturb", "perturbBound"});
      c.velocity = getVec(require(j, "velocity", path), join(path, "velocity"));
    } else {
      checkKeys(j, path, {"type", "field", "x0", "T", "odeTol", "arcLength", "perturb",
                          "perturbBound"});
      const json& f = require(j, "field", path);
      const std::string fp = join(path, "field");
      if (!f.is_array() || f.empty()) fail(fp, "expected one component per coordinate");
      for (std::size_t i = 0; i < f.size(); ++i) {
        std::string p = fp + "[" + std::to_string(i) + "]";
        checkKeys(f[i], p, {"constant", "terms"});
        FieldComponent comp;
        if (const json* k = opt(f[i], "constant")) comp.constant = getDouble(*k, join(p, "constant"));
        if (const json* t = opt(f[i], "terms")) comp.terms = parseTrigTerms(*t, join(p, "terms"));
        c.field.comps.push_back(std::move(comp));
      }
      if (const json* T = opt(j, "T")) c.flowT = getDouble(*T, join(path, "T"));
      if (c.flowT <= 0) fail(join(path, "T"), "must be > 0");
      if (const json* tl = opt(j, "odeTol")) c.odeTol = getDouble(*tl, join(path, "odeTol"));
      if (c.odeTol <= 0) fail(join(path, "odeTol"), "must be > 0");
    }
    if (const json* al = opt(j, "arcLength")) c.arcLength = getBool(*al, join(path, "arcLength"));
    if (const json* pt = opt(j, "perturb")) {
      c.perturb = parsePerturbTerms(*pt, join(path, "perturb"), c.dim());
      c.perturbBound = getDouble(require(j, "perturbBound", path), join(path, "perturbBound"));
      if (c.perturbBound <= 0) fail(join(path, "perturbBound"), "must be > 0");
    } else if (opt(j, "perturbBound")) {
      fail(join(path, "perturbBound"), "given without perturb terms");
    }
  } else if (c.type == "loop") {
    checkKeys(j, path, {"type", "classValue", "x0"});
    c.loopClass = getIVec(require(j, "classValue", path), join(path, "classValue"));
    if (c.loopClass.isZero()) fail(join(path, "classValue"), "must be a nonzero class");
    c.arcLength = true;
  } else if (c.type == "counterexample") {
    checkKeys(j, path,
              {"type", "slope", "nMax", "t1", "contactRatio", "travelRatio", "stallRatio"});
    if (const json* v = opt(j, "slope")) c.wild.slope = getDouble(*v, join(path, "slope"));
    if (const json* v = opt(j, "nMax")) c.wild.nMax = static_cast<int>(getInt(*v, join(path, "nMax")));
    if (c.wild.nMax < 1 || c.wild.nMax > 16) fail(join(path, "nMax"), "expected 1 <= nMax <= 16");
    if (const json* v = opt(j, "t1")) c.wild.t1 = getDouble(*v, join(path, "t1"));
    if (const json* v = opt(j, "contactRatio"))
      c.wild.contactRatio = getDouble(*v, join(path, "contactRatio"));
    if (const json* v = opt(j, "travelRatio"))
      c.wild.travelRatio = getDouble(*v, join(path, "travelRatio"));
    if (const json* v = opt(j, "stallRatio"))
      c.wild.stallRatio = getDouble(*v, join(path, "stallRatio"));
  } else {  // oscillator
    checkKeys(j, path, {"type", "epochs", "a0", "growth", "epsilon"});
    int epochs = 12;
    double a0 = 3.0, growth = 3.0, epsilon = 0.1;
    if (const json* v = opt(j, "epochs")) epochs = static_cast<int>(getInt(*v, join(path, "epochs")));
    if (epochs < 2 || epochs > 64) fail(join(path, "epochs"), "expected 2 <= epochs <= 64");
    if (const json* v = opt(j, "a0")) a0 = getDouble(*v, join(path, "a0"));
    if (const json* v = opt(j, "growth")) growth = getDouble(*v, join(path, "growth"));
    if (const json* v = opt(j, "epsilon")) epsilon = getDouble(*v, join(path, "epsilon"));
    c.osc = OscillatorSpec::geometric(epochs, a0, growth, epsilon);
  }

  if (const json* x0 = opt(j, "x0")) {
    c.x0 = getVec(*x0, join(path, "x0"));
    if (c.x0.size() != c.dim()) fail(join(path, "x0"), "dimension mismatch with the curve");
  }
  return c;
}

BaseConfig parseBase(const json& j, const std::string& path) {
  expectObject(j, path);
  BaseConfig b;
  b.type = getString(require(j, "type", path), join(path, "type"));
  if (b.type == "rotation") {
    checkKeys(j, path, {"type", "alpha"});
    const json& a = require(j, "alpha", path);
    if (a.is_string()) {
      if (a.get<std::string>() != "golden")
        fail(join(path, "alpha"), "expected a number or \"golden\"");
      b.golden = true;
    } else {
      b.alpha = getDouble(a, join(path, "alpha"));
      if (b.alpha <= 0.0 || b.alpha >= 1.0) fail(join(path, "alpha"), "expected 0 < alpha < 1");
    }
  } else if (b.type == "iet") {
    checkKeys(j, path, {"type", "lengths", "perm"});
    b.lengths = getDoubleList(require(j, "lengths", path), join(path, "lengths"));
    b.perm = getIntList(require(j, "perm", path), join(path, "perm"));
    if (b.lengths.size() != b.perm.size() || b.lengths.size() < 2)
      fail(path, "iet needs matching lengths and perm of size >= 2");
  } else if (b.type == "odometer") {
    checkKeys(j, path, {"type", "depth"});
    if (const json* d = opt(j, "depth")) b.depth = static_cast<int>(getInt(*d, join(path, "depth")));
    if (b.depth < 1 || b.depth > 30) fail(join(path, "depth"), "expected 1 <= depth <= 30");
  } else if (b.type == "atoms") {
    checkKeys(j, path, {"type", "weights"});
    b.ws = getDoubleList(require(j, "weights", path), join(path, "weights"));
    if (b.ws.size() != 2) fail(join(path, "weights"), "expected exactly two weights");
  } else if (b.type == "cycle") {
    checkKeys(j, path, {"type", "xs", "ws"});
    b.xs = getDoubleList(require(j, "xs", path), join(path, "xs"));
    b.ws = getDoubleList(require(j, "ws", path), join(path, "ws"));
    if (b.xs.size() != b.ws.size() || b.xs.empty()) fail(path, "cycle needs matching xs and ws");
  } else {
    fail(join(path, "type"), "unknown base type '" + b.type + "'");
  }
  return b;
}

RoofConfig parseRoof(const json& j, const std::string& path) {
  checkKeys(j, path, {"constant", "terms", "edges", "values"});
  RoofConfig r;
  bool hasTrig = opt(j, "constant") || opt(j, "terms");
  bool hasCells = opt(j, "edges") || opt(j, "values");
  if (hasTrig && hasCells) fail(path, "trig and piecewise forms are mutually exclusive");
  if (hasCells) {
    r.edges = getDoubleList(require(j, "edges", path), join(path, "edges"));
    r.values = getDoubleList(require(j, "values", path), join(path, "values"));
    if (r.edges.size() != r.values.size() + 1)
      fail(path, "piecewise roof needs edges = values + 1");
  } else {
    if (const json* c = opt(j, "constant")) r.constant = getDouble(*c, join(path, "constant"));
    if (const json* t = opt(j, "terms")) r.terms = parseTrigTerms(*t, join(path, "terms"));
    for (const auto& t : r.terms)
      if (t.freq.size() != 1) fail(join(path, "terms"), "roof frequencies live on the circle");
  }
  return r;
}

std::vector<PhiCellConfig> parsePhi(const json& j, const std::string& path) {
  if (!j.is_array() || j.empty()) fail(path, "expected a non-empty cell array");
  std::vector<PhiCellConfig> cells;
  for (std::size_t i = 0; i < j.size(); ++i) {
    std::string p = path + "[" + std::to_string(i) + "]";
    checkKeys(j[i], p, {"cell", "class"});
    PhiCellConfig c;
    Vec cell = getVec(require(j[i], "cell", p), join(p, "cell"));
    if (cell.size() != 2 || !(cell[0] < cell[1]))
      fail(join(p, "cell"), "expected [lo, hi] with lo < hi");
    c.lo = cell[0];
    c.hi = cell[1];
    c.value = getIVec(require(j[i], "class", p), join(p, "class"));
    cells.push_back(std::move(c));
  }
  return cells;
}

std::vector<double> parseSeeds(const json& j, const std::string& path, int& count) {
  if (j.is_number_integer()) {
    count = static_cast<int>(j.get<long long>());
    if (count < 1 || count > 4096) fail(path, "expected 1 <= seed count <= 4096");
    return {};
  }
  std::vector<double> seeds = getDoubleList(j, path);
  if (seeds.empty()) fail(path, "expected seeds or a seed count");
  for (std::size_t i = 0; i < seeds.size(); ++i)
    if (seeds[i] < 0.0 || seeds[i] >= 1.0)
      fail(path + "[" + std::to_string(i) + "]", "seeds live in [0, 1)");
  return seeds;
}

SolenoidConfig parseSolenoid(const json& j, const std::string& path) {
  expectObject(j, path);
  checkKeys(j, path, {"base", "realize", "arcLength", "roof", "phi", "seeds", "N"});
  SolenoidConfig s;
  s.base = parseBase(require(j, "base", path), join(path, "base"));
  if (const json* r = opt(j, "realize")) s.realize = getBool(*r, join(path, "realize"));
  if (const json* a = opt(j, "arcLength"))
    s.realizeArcLength = getBool(*a, join(path, "arcLength"));
  if (s.realize) {
    if (s.base.type != "rotation")
      fail(join(path, "realize"), "torus-flow realization needs a rotation base");
    if (opt(j, "roof") || opt(j, "phi"))
      fail(path, "realize fixes roof and phi; drop them");
  } else {
    if (opt(j, "arcLength")) fail(join(path, "arcLength"), "only meaningful with realize");
    if (const json* r = opt(j, "roof")) s.roof = parseRoof(*r, join(path, "roof"));
    s.phi = parsePhi(require(j, "phi", path), join(path, "phi"));
  }
  if (const json* sd = opt(j, "seeds")) s.seeds = parseSeeds(*sd, join(path, "seeds"), s.seedCount);
  if (s.seeds.empty() && s.seedCount == 0) s.seedCount = 8;
  if (const json* n = opt(j, "N")) s.N = getInt(*n, join(path, "N"));
  if (s.N < 16 || s.N > 100000000LL) fail(join(path, "N"), "expected 16 <= N <= 1e8");
  return s;
}

KSolenoidConfig parseKSolenoid(const json& j, const std::string& path) {
  expectObject(j, path);
  checkKeys(j, path, {"k", "t3", "base", "separation", "diameter", "volume", "phi", "epsilon0",
                      "constants", "seeds", "b0", "windows", "capVolume", "radii",
                      "geometricSamples"});
  KSolenoidConfig s;
  s.k = static_cast<int>(getInt(require(j, "k", path), join(path, "k")));
  if (s.k < 2) fail(join(path, "k"), "expected k >= 2");
  s.base = parseBase(require(j, "base", path), join(path, "base"));

  if (const json* t3 = opt(j, "t3")) {
    const std::string tp = join(path, "t3");
    checkKeys(*t3, tp, {"wrap", "unitVolume"});
    if (s.k != 2) fail(join(path, "k"), "the immersed model needs k = 2");
    if (s.base.type != "rotation") fail(join(path, "base"), "the immersed model needs a rotation");
    Vec wrap = getVec(require(*t3, "wrap", tp), join(tp, "wrap"));
    if (wrap.size() != 2 || !(wrap[0] < wrap[1]) || wrap[0] < 0.0 || wrap[1] > 1.0)
      fail(join(tp, "wrap"), "expected [lo, hi] inside [0, 1]");
    s.useT3 = true;
    s.wrapLo = wrap[0];
    s.wrapHi = wrap[1];
    if (const json* u = opt(*t3, "unitVolume")) s.unitVolume = getBool(*u, join(tp, "unitVolume"));
    for (const char* k : {"separation", "diameter", "volume", "phi", "epsilon0"})
      if (opt(j, k)) fail(join(path, k), "fixed by the immersed model; drop it");
  } else {
    s.separation = parseRoof(require(j, "separation", path), join(path, "separation"));
    s.diameter = parseRoof(require(j, "diameter", path), join(path, "diameter"));
    s.volume = parseRoof(require(j, "volume", path), join(path, "volume"));
    s.phi = parsePhi(require(j, "phi", path), join(path, "phi"));
    if (const json* e = opt(j, "epsilon0")) s.epsilon0 = getDouble(*e, join(path, "epsilon0"));
  }

  if (const json* c = opt(j, "constants")) {
    const std::string cp = join(path, "constants");
    checkKeys(*c, cp, {"c0", "c1", "c2"});
    std::array<double, 3> k{};
    k[0] = getDouble(require(*c, "c0", cp), join(cp, "c0"));
    k[1] = getDouble(require(*c, "c1", cp), join(cp, "c1"));
    k[2] = getDouble(require(*c, "c2", cp), join(cp, "c2"));
    for (double v : k)
      if (v <= 0) fail(cp, "constants must be > 0");
    s.constants = k;
  }

  if (const json* sd = opt(j, "seeds")) s.seeds = parseSeeds(*sd, join(path, "seeds"), s.seedCount);
  if (s.seeds.empty() && s.seedCount == 0) s.seedCount = 4;
  if (const json* b = opt(j, "b0")) s.b0 = getInt(*b, join(path, "b0"));
  if (s.b0 < 1) fail(join(path, "b0"), "expected b0 >= 1");
  if (const json* w = opt(j, "windows"))
    s.windowCount = static_cast<int>(getInt(*w, join(path, "windows")));
  if (s.windowCount < 3 || s.windowCount > 40)
    fail(join(path, "windows"), "expected 3 <= windows <= 40");
  if (const json* c = opt(j, "capVolume")) s.capVolume = getDouble(*c, join(path, "capVolume"));
  if (s.capVolume < 0) fail(join(path, "capVolume"), "must be >= 0");

  if (const json* r = opt(j, "radii")) {
    const std::string rp = join(path, "radii");
    if (r->is_array()) {
      s.radii = getDoubleList(*r, rp);
      for (std::size_t i = 0; i < s.radii.size(); ++i)
        if (s.radii[i] <= 0) fail(rp + "[" + std::to_string(i) + "]", "must be > 0");
    } else if (r->is_object()) {
      checkKeys(*r, rp, {"dyadicFrom", "dyadicTo", "randomCount", "randomLo", "randomHi"});
      if (opt(*r, "dyadicFrom") || opt(*r, "dyadicTo")) {
        s.dyadicFrom = static_cast<int>(getInt(require(*r, "dyadicFrom", rp), join(rp, "dyadicFrom")));
        s.dyadicTo = static_cast<int>(getInt(require(*r, "dyadicTo", rp), join(rp, "dyadicTo")));
        if (s.dyadicFrom < 0 || s.dyadicTo < s.dyadicFrom || s.dyadicTo > 40)
          fail(rp, "expected 0 <= dyadicFrom <= dyadicTo <= 40");
        if (opt(*r, "randomCount")) fail(rp, "dyadic and random draws are mutually exclusive");
      } else {
        s.randomCount = static_cast<int>(getInt(require(*r, "randomCount", rp), join(rp, "randomCount")));
        s.randomLo = getDouble(require(*r, "randomLo", rp), join(rp, "randomLo"));
        s.randomHi = getDouble(require(*r, "randomHi", rp), join(rp, "randomHi"));
        if (s.randomCount < 1 || s.randomCount > 100000) fail(join(rp, "randomCount"), "expected 1..1e5");
        if (!(0 < s.randomLo && s.randomLo < s.randomHi)) fail(rp, "expected 0 < randomLo < randomHi");
      }
    } else {
      fail(rp, "expected an array or a draw descriptor");
    }
  }
  if (const json* g = opt(j, "geometricSamples")) {
    s.geometricSamples = static_cast<int>(getInt(*g, join(path, "geometricSamples")));
    if (s.geometricSamples < 0 || s.geometricSamples > 1000000)
      fail(join(path, "geometricSamples"), "expected 0..1e6");
    if (!s.useT3 && s.geometricSamples > 0)
      fail(join(path, "geometricSamples"), "needs the immersed model");
  }
  return s;
}

StableNormConfig parseStableNorm(const json& j, const std::string& path, int dim) {
  expectObject(j, path);
  checkKeys(j, path, {"classes", "nMax", "resolution"});
  StableNormConfig s;
  const json& cls = require(j, "classes", path);
  const std::string cp = join(path, "classes");
  if (!cls.is_array() || cls.empty()) fail(cp, "expected at least one class");
  for (std::size_t i = 0; i < cls.size(); ++i) {
    IVec a = getIVec(cls[i], cp + "[" + std::to_string(i) + "]");
    if (a.size() != dim)
      fail(cp + "[" + std::to_string(i) + "]", "expected dim " + std::to_string(dim));
    s.classes.push_back(std::move(a));
  }
  if (const json* n = opt(j, "nMax")) s.nMax = static_cast<int>(getInt(*n, join(path, "nMax")));
  if (s.nMax < 4 || s.nMax > 64) fail(join(path, "nMax"), "expected 4 <= nMax <= 64");
  if (const json* r = opt(j, "resolution"))
    s.resolution = static_cast<int>(getInt(*r, join(path, "resolution")));
  if (s.resolution < 2 || s.resolution > 128)
    fail(join(path, "resolution"), "expected 2 <= resolution <= 128");
  return s;
}

void parseSchedules(const json& j, const std::string& path, ExperimentConfig& cfg) {
  checkKeys(j, path, {"window", "grid"});
  if (const json* w = opt(j, "window")) {
    const std::string wp = join(path, "window");
    checkKeys(*w, wp, {"s0", "t0", "count", "ratio"});
    WindowScheduleConfig ws;
    if (const json* v = opt(*w, "s0")) ws.s0 = getDouble(*v, join(wp, "s0"));
    if (const json* v = opt(*w, "t0")) ws.t0 = getDouble(*v, join(wp, "t0"));
    if (const json* v = opt(*w, "count")) ws.count = static_cast<int>(getInt(*v, join(wp, "count")));
    if (const json* v = opt(*w, "ratio")) ws.ratio = getDouble(*v, join(wp, "ratio"));
    if (ws.s0 <= 0 || ws.t0 <= 0) fail(wp, "s0 and t0 must be > 0");
    if (ws.count < 4 || ws.count > 60) fail(join(wp, "count"), "expected 4 <= count <= 60");
    if (ws.ratio <= 1.0) fail(join(wp, "ratio"), "must be > 1");
    cfg.window = ws;
  }
  if (const json* g = opt(j, "grid")) {
    const std::string gp = join(path, "grid");
    GridScheduleConfig gs;
    if (opt(*g, "times")) {
      checkKeys(*g, gp, {"times"});
      gs.times = getDoubleList(require(*g, "times", gp), join(gp, "times"));
      if (gs.times.size() < 3) fail(join(gp, "times"), "expected at least 3 times");
      for (std::size_t i = 0; i < gs.times.size(); ++i)
        if (gs.times[i] <= 0) fail(join(gp, "times") + "[" + std::to_string(i) + "]", "must be > 0");
    } else {
      checkKeys(*g, gp, {"s0", "t0", "countS", "countT", "ratio"});
      if (const json* v = opt(*g, "s0")) gs.s0 = getDouble(*v, join(gp, "s0"));
      if (const json* v = opt(*g, "t0")) gs.t0 = getDouble(*v, join(gp, "t0"));
      if (const json* v = opt(*g, "countS"))
        gs.countS = static_cast<int>(getInt(*v, join(gp, "countS")));
      if (const json* v = opt(*g, "countT"))
        gs.countT = static_cast<int>(getInt(*v, join(gp, "countT")));
      if (const json* v = opt(*g, "ratio")) gs.ratio = getDouble(*v, join(gp, "ratio"));
      if (gs.s0 <= 0 || gs.t0 <= 0) fail(gp, "s0 and t0 must be > 0");
      if (gs.countS < 2 || gs.countT < 2 || gs.countS > 40 || gs.countT > 40)
        fail(gp, "expected 2 <= countS, countT <= 40");
      if (gs.ratio <= 1.0) fail(join(gp, "ratio"), "must be > 1");
    }
    cfg.grid = gs;
  }
}

void parseAssertions(const json& j, const std::string& path, ExperimentConfig& cfg) {
  const std::string& sub = cfg.subcommand;
  std::set<std::string> allowed = {"converged"};
  if (sub == "asymptotic") allowed.insert({"target", "targetTol", "routesAgreeTol"});
  if (sub == "cluster") allowed.insert({"balanced", "coneRays", "coneRaysNear", "coneTol"});
  if (sub == "counterexample")
    allowed.insert({"balanced", "balancedSeparationMin", "fullApproachMax", "balancedNearTarget",
                    "balancedNearTol"});
  if (sub == "solenoid")
    allowed.insert({"leafMatchesRsTol", "geometricAgreeTol", "measureDistanceMax"});
  if (sub == "ksolenoid")
    allowed.insert({"leafMatchesRsTol", "exhaustionWithinBound", "geometricTableExact"});
  if (sub == "stablenorm") allowed.insert({"targets", "targetsTol", "homogeneity"});
  checkKeys(j, path, allowed);

  AssertionsConfig& a = cfg.assertions;
  if (const json* v = opt(j, "converged")) a.converged = getBool(*v, join(path, "converged"));
  if (const json* v = opt(j, "target")) a.target = getVec(*v, join(path, "target"));
  if (const json* v = opt(j, "targetTol")) a.targetTol = getDouble(*v, join(path, "targetTol"));
  if (a.targetTol <= 0) fail(join(path, "targetTol"), "must be > 0");
  if (const json* v = opt(j, "routesAgreeTol")) {
    a.routesAgreeTol = getDouble(*v, join(path, "routesAgreeTol"));
    if (*a.routesAgreeTol <= 0) fail(join(path, "routesAgreeTol"), "must be > 0");
  }
  if (const json* v = opt(j, "balanced")) a.balanced = getBool(*v, join(path, "balanced"));
  if (const json* v = opt(j, "coneRays")) {
    a.coneRays = static_cast<int>(getInt(*v, join(path, "coneRays")));
    if (*a.coneRays < 0) fail(join(path, "coneRays"), "must be >= 0");
  }
  if (const json* v = opt(j, "coneRaysNear")) {
    const std::string rp = join(path, "coneRaysNear");
    if (!v->is_array() || v->empty()) fail(rp, "expected an array of directions");
    for (std::size_t i = 0; i < v->size(); ++i)
      a.coneRaysNear.push_back(getVec((*v)[i], rp + "[" + std::to_string(i) + "]"));
  }
  if (const json* v = opt(j, "coneTol")) a.coneTol = getDouble(*v, join(path, "coneTol"));
  if (a.coneTol <= 0) fail(join(path, "coneTol"), "must be > 0");
  if (const json* v = opt(j, "balancedSeparationMin")) {
    a.balancedSeparationMin = getDouble(*v, join(path, "balancedSeparationMin"));
    if (*a.balancedSeparationMin <= 0) fail(join(path, "balancedSeparationMin"), "must be > 0");
  }
  if (const json* v = opt(j, "fullApproachMax")) {
    a.fullApproachMax = getDouble(*v, join(path, "fullApproachMax"));
    if (*a.fullApproachMax <= 0) fail(join(path, "fullApproachMax"), "must be > 0");
  }
  if (const json* v = opt(j, "balancedNearTarget"))
    a.balancedNearTarget = getVec(*v, join(path, "balancedNearTarget"));
  if (const json* v = opt(j, "balancedNearTol"))
    a.balancedNearTol = getDouble(*v, join(path, "balancedNearTol"));
  if (a.balancedNearTol <= 0) fail(join(path, "balancedNearTol"), "must be > 0");
  if (const json* v = opt(j, "leafMatchesRsTol")) {
    a.leafMatchesRsTol = getDouble(*v, join(path, "leafMatchesRsTol"));
    if (*a.leafMatchesRsTol <= 0) fail(join(path, "leafMatchesRsTol"), "must be > 0");
  }
  if (const json* v = opt(j, "geometricAgreeTol")) {
    a.geometricAgreeTol = getDouble(*v, join(path, "geometricAgreeTol"));
    if (*a.geometricAgreeTol <= 0) fail(join(path, "geometricAgreeTol"), "must be > 0");
  }
  if (const json* v = opt(j, "measureDistanceMax")) {
    a.measureDistanceMax = getDouble(*v, join(path, "measureDistanceMax"));
    if (*a.measureDistanceMax <= 0) fail(join(path, "measureDistanceMax"), "must be > 0");
  }
  if (const json* v = opt(j, "exhaustionWithinBound"))
    a.exhaustionWithinBound = getBool(*v, join(path, "exhaustionWithinBound"));
  if (const json* v = opt(j, "geometricTableExact"))
    a.geometricTableExact = getBool(*v, join(path, "geometricTableExact"));
  if (const json* v = opt(j, "targets")) a.targets = getDoubleList(*v, join(path, "targets"));
  if (const json* v = opt(j, "targetsTol")) a.targetsTol = getDouble(*v, join(path, "targetsTol"));
  if (a.targetsTol <= 0) fail(join(path, "targetsTol"), "must be > 0");
  if (const json* v = opt(j, "homogeneity")) {
    const std::string hp = join(path, "homogeneity");
    if (!v->is_array()) fail(hp, "expected an array of checks");
    for (std::size_t i = 0; i < v->size(); ++i) {
      std::string p = hp + "[" + std::to_string(i) + "]";
      checkKeys((*v)[i], p, {"i", "j", "factor", "tol"});
      HomogeneityCheck h;
      h.i = static_cast<int>(getInt(require((*v)[i], "i", p), join(p, "i")));
      h.j = static_cast<int>(getInt(require((*v)[i], "j", p), join(p, "j")));
      h.factor = getDouble(require((*v)[i], "factor", p), join(p, "factor"));
      if (const json* t = opt((*v)[i], "tol")) h.tol = getDouble(*t, join(p, "tol"));
      if (h.factor <= 0) fail(join(p, "factor"), "must be > 0");
      if (h.tol <= 0) fail(join(p, "tol"), "must be > 0");
      a.homogeneity.push_back(h);
    }
  }
}

int subjectDim(const ExperimentConfig& cfg) {
  if (cfg.subcommand == "stablenorm")
    return cfg.stableNorm.classes.empty() ? cfg.geometry.dim
                                          : static_cast<int>(cfg.stableNorm.classes[0].size());
  return cfg.curve.dim();
}

// dry-run construction so every shape problem surfaces as a ConfigError
// before run() starts
void validateBuilds(const ExperimentConfig& cfg) {
  auto wrap = [](const std::string& path, const auto& fn) {
    try {
      fn();
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception& e) {
      fail(path, e.what());
    }
  };
  if (cfg.subcommand == "asymptotic" || cfg.subcommand == "cluster" ||
      cfg.subcommand == "counterexample" || cfg.subcommand == "stablenorm") {
    wrap("geometry", [&] { cfg.geometry.build(); });
  }
  if (cfg.subcommand == "solenoid")
    wrap("subject", [&] { build_solenoid(cfg.solenoid); });
  if (cfg.subcommand == "ksolenoid")
    wrap("subject", [&] { build_trapping(cfg.ksolenoid); });
}

}  // namespace

TorusGeometry GeometryConfig::build() const {
  Mat g = gram.size() == 0 ? Mat(Mat::Identity(dim, dim)) : gram;
  return TorusGeometry(g, conformal);
}

int CurveConfig::dim() const {
  if (type == "linearFlow") return static_cast<int>(velocity.size());
  if (type == "loop") return static_cast<int>(loopClass.size());
  if (type == "flow") return field.dim();
  return 2;  // counterexample and oscillator live on T^2
}

LiftedCurve CurveConfig::build(const TorusGeometry& geom) const {
  Vec start = x0.size() == dim() ? x0 : Vec(Vec::Zero(dim()));
  auto finish = [&](LiftedCurve c) {
    if (!perturb.empty()) c = perturb_bounded(c, perturb, perturbBound);
    return c;
  };
  if (type == "linearFlow") {
    auto c = linear_flow_curve(velocity, start);
    if (arcLength) c = arc_length_reparametrize(c, geom);
    return finish(std::move(c));
  }
  if (type == "loop")
    return arc_length_reparametrize(linear_flow_curve(toReal(loopClass), start), geom);
  if (type == "flow") {
    auto c = integrate_flow(field, start, flowT, odeTol);
    if (arcLength) c = arc_length_reparametrize(c, geom);
    return finish(std::move(c));
  }
  if (type == "counterexample") return counterexample_curve(wild);
  return axes_oscillator_curve(osc);
}

TransversalSystem BaseConfig::build() const {
  if (type == "rotation")
    return golden ? TransversalSystem::goldenRotation() : TransversalSystem::rotation(alpha);
  if (type == "iet") return TransversalSystem::iet(lengths, perm);
  if (type == "odometer") return TransversalSystem::dyadicOdometer(depth);
  if (type == "atoms") return TransversalSystem::twoAtoms(ws[0], ws[1]);
  return TransversalSystem::atomCycle(xs, ws);
}

RoofFunction RoofConfig::build() const {
  if (!edges.empty()) return RoofFunction::piecewise(edges, values);
  RoofFunction r = RoofFunction::constant(constant);
  r.trig.terms = terms;
  return r;
}

PiecewiseClass build_class(const std::vector<PhiCellConfig>& cells) {
  std::vector<PhiCellConfig> sorted = cells;
  std::sort(sorted.begin(), sorted.end(),
            [](const PhiCellConfig& a, const PhiCellConfig& b) { return a.lo < b.lo; });
  const double tol = 1e-12;
  if (std::abs(sorted.front().lo) > tol)
    throw ConfigError("subject.phi: cells must start at 0");
  if (std::abs(sorted.back().hi - 1.0) > tol)
    throw ConfigError("subject.phi: cells must end at 1");
  PiecewiseClass phi;
  phi.cellEdges.push_back(0.0);
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    if (i + 1 < sorted.size() && std::abs(sorted[i].hi - sorted[i + 1].lo) > tol)
      throw ConfigError("subject.phi: cells must tile [0, 1) without gaps or overlaps");
    if (sorted[i].value.size() != sorted.front().value.size())
      throw ConfigError("subject.phi: class vectors must share a dimension");
    phi.cellEdges.push_back(i + 1 == sorted.size() ? 1.0 : sorted[i].hi);
    phi.cellValues.push_back(sorted[i].value);
  }
  return phi;
}

double ExperimentConfig::tol(const std::string& name, double fallback) const {
  auto it = tolerances.find(name);
  return it == tolerances.end() ? fallback : it->second;
}

SuspensionSolenoid build_solenoid(const SolenoidConfig& cfg) {
  if (cfg.realize) {
    double a = cfg.base.golden ? (std::sqrt(5.0) - 1.0) / 2.0 : cfg.base.alpha;
    return realize_as_torus_flow(a, cfg.realizeArcLength);
  }
  SuspensionSolenoid sol;
  sol.base = cfg.base.build();
  sol.roof = cfg.roof.build();
  sol.phi = build_class(cfg.phi);
  validate_solenoid(sol);
  return sol;
}

TrappingSolenoid build_trapping(const KSolenoidConfig& cfg) {
  TrappingSolenoid sol;
  if (cfg.useT3) {
    double a = cfg.base.golden ? (std::sqrt(5.0) - 1.0) / 2.0 : cfg.base.alpha;
    sol = t3_trapping_solenoid(a, cfg.wrapLo, cfg.wrapHi, cfg.unitVolume);
  } else {
    sol.base = cfg.base.build();
    sol.separation = cfg.separation.build();
    sol.diameter = cfg.diameter.build();
    sol.slabVolume = cfg.volume.build();
    sol.slabClass = build_class(cfg.phi);
    sol.epsilon0 = cfg.epsilon0;
  }
  if (cfg.constants) {
    sol.c0 = (*cfg.constants)[0];
    sol.c1 = (*cfg.constants)[1];
    sol.c2 = (*cfg.constants)[2];
  }
  measure_constants(sol);
  validate_trapping(sol);
  return sol;
}

ExperimentConfig parse_config_text(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config: not valid JSON (") + e.what() + ")");
  }
  expectObject(doc, "config");
  checkKeys(doc, "config",
            {"schemaVersion", "subcommand", "geometry", "subject", "routes", "schedules",
             "tolerances", "seed", "assertions"});

  ExperimentConfig cfg;
  cfg.schemaVersion =
      static_cast<int>(getInt(require(doc, "schemaVersion", "config"), "schemaVersion"));
  if (cfg.schemaVersion != 1) fail("schemaVersion", "unsupported schema version (expected 1)");

  cfg.subcommand = getString(require(doc, "subcommand", "config"), "subcommand");
  static const std::set<std::string> kSubcommands = {"asymptotic", "cluster",    "solenoid",
                                                    "ksolenoid",  "stablenorm", "counterexample"};
  if (!kSubcommands.count(cfg.subcommand))
    fail("subcommand", "unknown subcommand '" + cfg.subcommand + "'");

  const bool usesGeometry = cfg.subcommand == "asymptotic" || cfg.subcommand == "cluster" ||
                            cfg.subcommand == "counterexample" || cfg.subcommand == "stablenorm";
  if (const json* g = opt(doc, "geometry")) {
    if (!usesGeometry) fail("geometry", "not consumed by subcommand '" + cfg.subcommand + "'");
    cfg.geometry = parseGeometry(*g, "geometry");
  }

  const json& subject = require(doc, "subject", "config");
  if (cfg.subcommand == "solenoid")
    cfg.solenoid = parseSolenoid(subject, "subject");
  else if (cfg.subcommand == "ksolenoid")
    cfg.ksolenoid = parseKSolenoid(subject, "subject");
  else if (cfg.subcommand == "stablenorm")
    cfg.stableNorm = parseStableNorm(subject, "subject", cfg.geometry.dim);
  else
    cfg.curve = parseCurve(subject, "subject", cfg.subcommand);

  if (const json* routes = opt(doc, "routes")) {
    if (cfg.subcommand != "asymptotic")
      fail("routes", "only meaningful for the asymptotic subcommand");
    if (!routes->is_array() || routes->empty()) fail("routes", "expected a non-empty array");
    for (std::size_t i = 0; i < routes->size(); ++i) {
      std::string name = getString((*routes)[i], "routes[" + std::to_string(i) + "]");
      if (name == "loop")
        cfg.routes.push_back(Route::loop);
      else if (name == "calib")
        cfg.routes.push_back(Route::calib);
      else if (name == "form")
        cfg.routes.push_back(Route::form);
      else if (name == "circle")
        cfg.routes.push_back(Route::circle);
      else if (name == "cross")
        cfg.routes.push_back(Route::cross);
      else
        fail("routes[" + std::to_string(i) + "]", "unknown route '" + name + "'");
    }
  } else if (cfg.subcommand == "asymptotic") {
    cfg.routes = {Route::loop, Route::calib, Route::form, Route::circle, Route::cross};
  }

  if (const json* sched = opt(doc, "schedules")) {
    parseSchedules(*sched, "schedules", cfg);
    if (cfg.window && cfg.subcommand != "asymptotic")
      fail("schedules.window", "only meaningful for the asymptotic subcommand");
    if (cfg.grid && cfg.subcommand != "cluster" && cfg.subcommand != "counterexample")
      fail("schedules.grid", "only meaningful for cluster and counterexample");
  }

  if (const json* tols = opt(doc, "tolerances")) {
    checkKeys(*tols, "tolerances", {"route", "cluster", "leaf", "kclass"});
    for (const auto& item : tols->items()) {
      double v = getDouble(item.value(), join("tolerances", item.key()));
      if (v <= 0) fail(join("tolerances", item.key()), "must be > 0");
      cfg.tolerances[item.key()] = v;
    }
  }

  if (const json* seed = opt(doc, "seed")) {
    long long s = getInt(*seed, "seed");
    if (s < 0) fail("seed", "must be >= 0");
    cfg.seed = static_cast<std::uint64_t>(s);
  }

  if (const json* a = opt(doc, "assertions")) parseAssertions(*a, "assertions", cfg);

  // cross-field dimension checks
  if (usesGeometry && cfg.subcommand != "stablenorm" && subjectDim(cfg) != cfg.geometry.dim)
    fail("geometry.dim", "does not match the subject dimension (" +
                             std::to_string(subjectDim(cfg)) + ")");
  if (cfg.assertions.target && cfg.assertions.target->size() != cfg.geometry.dim)
    fail("assertions.target", "dimension mismatch with the geometry");
  for (std::size_t i = 0; i < cfg.assertions.coneRaysNear.size(); ++i)
    if (cfg.assertions.coneRaysNear[i].size() != cfg.geometry.dim)
      fail("assertions.coneRaysNear[" + std::to_string(i) + "]",
           "dimension mismatch with the geometry");
  if (cfg.assertions.balancedNearTarget && cfg.assertions.balancedNearTarget->size() != 2)
    fail("assertions.balancedNearTarget", "expected a 2-vector");
  if (!cfg.assertions.targets.empty() &&
      cfg.assertions.targets.size() != cfg.stableNorm.classes.size())
    fail("assertions.targets", "expected one value per class");
  for (std::size_t i = 0; i < cfg.assertions.homogeneity.size(); ++i) {
    const auto& h = cfg.assertions.homogeneity[i];
    int n = static_cast<int>(cfg.stableNorm.classes.size());
    if (h.i < 0 || h.i >= n || h.j < 0 || h.j >= n)
      fail("assertions.homogeneity[" + std::to_string(i) + "]", "class index out of range");
  }

  // numerically integrated subjects only exist on [-T, T]; make sure the
  // largest scheduled window fits instead of failing deep inside run()
  if (cfg.curve.type == "flow") {
    double reach = 0.0;
    if (cfg.subcommand == "asymptotic") {
      WindowScheduleConfig ws = cfg.window ? *cfg.window : WindowScheduleConfig{};
      reach = std::max(ws.s0, ws.t0) * std::pow(ws.ratio, ws.count - 1);
    } else if (cfg.grid && !cfg.grid->times.empty()) {
      reach = *std::max_element(cfg.grid->times.begin(), cfg.grid->times.end());
    } else {
      GridScheduleConfig gs = cfg.grid ? *cfg.grid : GridScheduleConfig{};
      reach = std::max(gs.s0 * std::pow(gs.ratio, gs.countS - 1),
                       gs.t0 * std::pow(gs.ratio, gs.countT - 1));
    }
    if (reach > cfg.curve.flowT)
      fail("subject.T", "integration horizon " + std::to_string(cfg.curve.flowT) +
                            " does not cover the largest scheduled window (" +
                            std::to_string(reach) + ")");
  }

  validateBuilds(cfg);
  cfg.canonicalText = doc.dump(2);
  return cfg;
}

ExperimentConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot read '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str());
}

}  // namespace acyc
