#include "apifk/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include "apifk/enum_miner.hpp"
#include "apifk/errors.hpp"
#include "apifk/param_abstraction.hpp"
#include "apifk/predictor/model.hpp"
#include "apifk/utf8.hpp"

namespace apifk::sim {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

std::uint64_t uniform(std::mt19937_64& rng, std::uint64_t n) { return n == 0 ? 0 : rng() % n; }

char random_digit(std::mt19937_64& rng) { return static_cast<char>('0' + uniform(rng, 10)); }
char random_lower(std::mt19937_64& rng) { return static_cast<char>('a' + uniform(rng, 26)); }
char random_upper(std::mt19937_64& rng) { return static_cast<char>('A' + uniform(rng, 26)); }
char32_t random_cjk(std::mt19937_64& rng) {
  return static_cast<char32_t>(0x4E00 + uniform(rng, 0x9FFF - 0x4E00 + 1));
}

const std::string* lookup(const ParamList& params, const std::string& name) {
  for (const auto& [k, v] : params) {
    if (k == name) return &v;
  }
  return nullptr;
}

std::string charset_name(Charset c) {
  switch (c) {
    case Charset::Lower: return "lower";
    case Charset::Upper: return "upper";
    case Charset::Mixed: return "mixed";
    case Charset::Cjk: break;
  }
  return "cjk";
}

Charset charset_from(const std::string& s) {
  if (s == "lower") return Charset::Lower;
  if (s == "upper") return Charset::Upper;
  if (s == "mixed") return Charset::Mixed;
  if (s == "cjk") return Charset::Cjk;
  throw InvalidConfig("unknown charset " + s);
}

nlohmann::json gen_to_json(const ValueGenerator& gen) {
  return std::visit(
      overloaded{
          [](const DigitsGen& g) -> nlohmann::json {
            return {{"kind", "digits"}, {"length", g.length}, {"prefix", g.prefix}};
          },
          [](const EnumGen& g) -> nlohmann::json {
            return {{"kind", "enum"}, {"values", g.values}};
          },
          [](const PrefixedIdGen& g) -> nlohmann::json {
            return {{"kind", "prefixed_id"},
                    {"prefix", g.prefix},
                    {"digits", g.digits},
                    {"suffix", g.suffix}};
          },
          [](const FreeTextGen& g) -> nlohmann::json {
            return {{"kind", "free_text"},
                    {"min_length", g.min_length},
                    {"max_length", g.max_length},
                    {"charset", charset_name(g.charset)}};
          },
          [](const IntegerGen& g) -> nlohmann::json {
            return {{"kind", "integer"}, {"min", g.min}, {"max", g.max}};
          },
          [](const ShapeGen& g) -> nlohmann::json {
            return {{"kind", "shape"}, {"shape", g.shape}};
          },
      },
      gen);
}

ValueGenerator gen_from_json(const nlohmann::json& j) {
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "digits") return DigitsGen{j.at("length").get<std::size_t>(), j.value("prefix", "")};
  if (kind == "enum") return EnumGen{j.at("values").get<std::vector<std::string>>()};
  if (kind == "prefixed_id") {
    return PrefixedIdGen{j.value("prefix", ""), j.at("digits").get<std::size_t>(),
                         j.value("suffix", "")};
  }
  if (kind == "free_text") {
    return FreeTextGen{j.at("min_length").get<std::size_t>(), j.at("max_length").get<std::size_t>(),
                       charset_from(j.value("charset", "lower"))};
  }
  if (kind == "integer") return IntegerGen{j.at("min").get<std::int64_t>(), j.at("max").get<std::int64_t>()};
  if (kind == "shape") return ShapeGen{j.at("shape").get<std::string>()};
  throw InvalidConfig("unknown generator kind " + kind);
}

nlohmann::json pred_to_json(const Predicate& pred) {
  return std::visit(
      overloaded{
          [](const MissingPred& p) -> nlohmann::json {
            return {{"kind", "missing"}, {"param", p.param}};
          },
          [](const NotInPred& p) -> nlohmann::json {
            return {{"kind", "not_in"},
                    {"param", p.param},
                    {"values", p.values},
                    {"or_missing", p.or_missing}};
          },
          [](const NotShapePred& p) -> nlohmann::json {
            return {{"kind", "not_shape"},
                    {"param", p.param},
                    {"shape", p.shape},
                    {"or_missing", p.or_missing}};
          },
          [](const OutOfRangePred& p) -> nlohmann::json {
            return {{"kind", "out_of_range"}, {"param", p.param},          {"min", p.min},
                    {"max", p.max},           {"or_missing", p.or_missing}};
          },
      },
      pred);
}

Predicate pred_from_json(const nlohmann::json& j) {
  const auto kind = j.at("kind").get<std::string>();
  const auto param = j.at("param").get<std::string>();
  const bool or_missing = j.value("or_missing", false);
  if (kind == "missing") return MissingPred{param};
  if (kind == "not_in") {
    return NotInPred{param, j.at("values").get<std::vector<std::string>>(), or_missing};
  }
  if (kind == "not_shape") return NotShapePred{param, j.at("shape").get<std::string>(), or_missing};
  if (kind == "out_of_range") {
    return OutOfRangePred{param, j.at("min").get<double>(), j.at("max").get<double>(), or_missing};
  }
  throw InvalidConfig("unknown predicate kind " + kind);
}

}  // namespace

std::string generate_value(const ValueGenerator& gen, std::mt19937_64& rng) {
  return std::visit(
      overloaded{
          [&](const DigitsGen& g) {
            std::string out = g.prefix;
            while (out.size() < g.length) out.push_back(random_digit(rng));
            return out;
          },
          [&](const EnumGen& g) {
            if (g.values.empty()) throw InvalidConfig("enum generator without values");
            return g.values[uniform(rng, g.values.size())];
          },
          [&](const PrefixedIdGen& g) {
            std::string out = g.prefix;
            for (std::size_t i = 0; i < g.digits; ++i) out.push_back(random_digit(rng));
            return out + g.suffix;
          },
          [&](const FreeTextGen& g) {
            const auto span = g.max_length >= g.min_length ? g.max_length - g.min_length : 0;
            const auto len = g.min_length + uniform(rng, span + 1);
            std::string out;
            for (std::size_t i = 0; i < len; ++i) {
              switch (g.charset) {
                case Charset::Lower: out.push_back(random_lower(rng)); break;
                case Charset::Upper: out.push_back(random_upper(rng)); break;
                case Charset::Mixed:
                  out.push_back(uniform(rng, 2) ? random_upper(rng) : random_lower(rng));
                  break;
                case Charset::Cjk: utf8::append(out, random_cjk(rng)); break;
              }
            }
            return out;
          },
          [&](const IntegerGen& g) {
            const auto span = static_cast<std::uint64_t>(g.max - g.min);
            return std::to_string(g.min + static_cast<std::int64_t>(uniform(rng, span + 1)));
          },
          [&](const ShapeGen& g) {
            std::string out;
            for (char32_t c : utf8::decode(g.shape)) {
              switch (c) {
                case U'd': out.push_back(random_digit(rng)); break;
                case U'x': out.push_back(random_lower(rng)); break;
                case U'X': out.push_back(random_upper(rng)); break;
                case U'z': utf8::append(out, random_cjk(rng)); break;
                default: utf8::append(out, c); break;
              }
            }
            return out;
          },
      },
      gen);
}

bool matches(const Predicate& pred, const ParamList& params) {
  return std::visit(
      overloaded{
          [&](const MissingPred& p) { return lookup(params, p.param) == nullptr; },
          [&](const NotInPred& p) {
            const auto* v = lookup(params, p.param);
            if (!v) return p.or_missing;
            return std::find(p.values.begin(), p.values.end(), *v) == p.values.end();
          },
          [&](const NotShapePred& p) {
            const auto* v = lookup(params, p.param);
            if (!v) return p.or_missing;
            return transform(*v) != p.shape;
          },
          [&](const OutOfRangePred& p) {
            const auto* v = lookup(params, p.param);
            if (!v) return p.or_missing;
            const auto parsed = parse_decimal(*v);
            return !parsed || *parsed < p.min || *parsed > p.max;
          },
      },
      pred);
}

ApiCatalog SimScenario::catalog() const {
  ApiCatalog c;
  for (const auto& a : apis) c.add(a.spec);
  return c;
}

const ApiScenario* SimScenario::find(const std::string& api) const {
  for (const auto& a : apis) {
    if (a.spec.name == api) return &a;
  }
  return nullptr;
}

void validate(const SimScenario& scenario) {
  if (scenario.apis.empty()) throw InvalidConfig("scenario without apis");
  if (scenario.session_length == 0) throw InvalidConfig("session_length must be positive");
  scenario.catalog();  // spec validation and duplicate names
  for (const auto& a : scenario.apis) {
    if (!(a.weight > 0.0)) throw InvalidConfig(a.spec.name + ": weight must be positive");
    if (a.sequence_mix.empty()) throw InvalidConfig(a.spec.name + ": empty sequence mix");
    double total = 0.0;
    for (const auto& m : a.sequence_mix) {
      if (m.probability < 0.0) throw InvalidConfig(a.spec.name + ": negative mix probability");
      total += m.probability;
      for (const auto& p : m.params) {
        if (!a.generators.contains(p)) {
          throw InvalidConfig(a.spec.name + ": no generator for " + p);
        }
      }
    }
    if (std::abs(total - 1.0) > 1e-9) {
      throw InvalidConfig(a.spec.name + ": sequence mix probabilities must sum to 1");
    }
    if (a.corruption_rate < 0.0 || a.corruption_rate > 1.0) {
      throw InvalidConfig(a.spec.name + ": corruption rate outside [0, 1]");
    }
    for (const auto& c : a.corruptions) {
      if (c.kind == Corruption::Kind::Replace && !c.replacement) {
        throw InvalidConfig(a.spec.name + ": replace corruption without generator");
      }
    }
  }
}

OutcomeLabel evaluate(const SimScenario& scenario, const std::string& api,
                      const ParamList& params) {
  for (const auto& rule : scenario.rules) {
    if (rule.api == api && matches(rule.when, params)) {
      return OutcomeLabel::error(rule.code);
    }
  }
  return OutcomeLabel::right();
}

std::vector<std::size_t> exact_quotas(std::size_t n, const std::vector<double>& probabilities) {
  const double total = std::accumulate(probabilities.begin(), probabilities.end(), 0.0);
  std::vector<std::size_t> quotas(probabilities.size(), 0);
  if (probabilities.empty() || !(total > 0.0)) return quotas;
  std::vector<std::pair<double, std::size_t>> remainders;
  std::size_t assigned = 0;
  for (std::size_t i = 0; i < probabilities.size(); ++i) {
    const double exact = static_cast<double>(n) * probabilities[i] / total;
    // Absorb representation error so that 1000 * 0.7 lands on 700.
    const auto whole = static_cast<std::size_t>(std::floor(exact + 1e-9));
    quotas[i] = whole;
    assigned += whole;
    remainders.emplace_back(exact - static_cast<double>(whole), i);
  }
  std::stable_sort(remainders.begin(), remainders.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  for (std::size_t k = 0; assigned < n && k < remainders.size(); ++k, ++assigned) {
    ++quotas[remainders[k].second];
  }
  return quotas;
}

std::vector<ApiCallRecord> generate(const SimScenario& scenario, std::size_t n) {
  validate(scenario);
  using predictor::mix_seed;

  std::vector<double> weights;
  for (const auto& a : scenario.apis) weights.push_back(a.weight);
  const auto api_quotas = exact_quotas(n, weights);
  std::vector<std::size_t> api_of;
  api_of.reserve(n);
  for (std::size_t a = 0; a < api_quotas.size(); ++a) api_of.insert(api_of.end(), api_quotas[a], a);
  std::mt19937_64 api_rng(mix_seed(scenario.seed, 1));
  std::shuffle(api_of.begin(), api_of.end(), api_rng);

  std::vector<std::vector<std::size_t>> mix_queue(scenario.apis.size());
  std::vector<std::size_t> mix_pos(scenario.apis.size(), 0);
  for (std::size_t a = 0; a < scenario.apis.size(); ++a) {
    std::vector<double> probs;
    for (const auto& m : scenario.apis[a].sequence_mix) probs.push_back(m.probability);
    const auto quotas = exact_quotas(api_quotas[a], probs);
    for (std::size_t k = 0; k < quotas.size(); ++k) {
      mix_queue[a].insert(mix_queue[a].end(), quotas[k], k);
    }
    std::mt19937_64 mix_rng(mix_seed(scenario.seed, 2 + a));
    std::shuffle(mix_queue[a].begin(), mix_queue[a].end(), mix_rng);
  }

  std::vector<ApiCallRecord> records;
  records.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto a = api_of[i];
    const auto& api = scenario.apis[a];
    const auto& mix = api.sequence_mix[mix_queue[a][mix_pos[a]++]];
    std::mt19937_64 rng(mix_seed(scenario.seed ^ 0xA11CE, i));

    ApiCallRecord r;
    r.api = api.spec.name;
    for (const auto& p : mix.params) {
      r.params.emplace_back(p, generate_value(api.generators.at(p), rng));
    }
    if (api.corruption_rate > 0.0 && !api.corruptions.empty()) {
      const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
      if (u < api.corruption_rate) {
        std::vector<const Corruption*> applicable;
        for (const auto& c : api.corruptions) {
          if (lookup(r.params, c.param)) applicable.push_back(&c);
        }
        if (!applicable.empty()) {
          const auto& c = *applicable[uniform(rng, applicable.size())];
          auto it = std::find_if(r.params.begin(), r.params.end(),
                                 [&](const auto& kv) { return kv.first == c.param; });
          if (c.kind == Corruption::Kind::Drop) {
            r.params.erase(it);
          } else {
            it->second = generate_value(*c.replacement, rng);
          }
        }
      }
    }
    r.outcome = evaluate(scenario, r.api, r.params);
    r.session_id = "s" + std::to_string(i / scenario.session_length);
    r.timestamp = scenario.start_ts + static_cast<std::int64_t>(i) * scenario.ts_step;
    records.push_back(std::move(r));
  }
  return records;
}

namespace {

ParamSpec in(std::string name, bool required, ParamType type = ParamType::String) {
  return ParamSpec{std::move(name), required, type};
}

ParamSpec out(std::string name) { return ParamSpec{std::move(name), std::nullopt, ParamType::String}; }

const std::vector<std::string> kSignNames = {"hanxing", "aliyun", "dayu", "taobao"};

ApiScenario send_sms() {
  ApiScenario a;
  a.spec = ApiSpec{"SendSms",
                   {in("PhoneNumbers", true), in("SignName", true), in("TemplateCode", true),
                    in("TemplateParam", true), in("OutId", false)},
                   {out("Code"), out("Message"), out("BizId"), out("RequestId")}};
  a.generators = {
      {"PhoneNumbers", DigitsGen{11, "1"}},
      {"SignName", EnumGen{kSignNames}},
      {"TemplateCode", PrefixedIdGen{"SMS_", 9, ""}},
      {"TemplateParam", PrefixedIdGen{"{\"code\":\"", 4, "\"}"}},
      {"OutId", PrefixedIdGen{"ord", 8, ""}},
  };
  a.sequence_mix = {
      {{"PhoneNumbers", "SignName", "TemplateCode", "TemplateParam"}, 0.7},
      {{"PhoneNumbers", "SignName", "TemplateCode", "TemplateParam", "OutId"}, 0.3},
  };
  return a;
}

}  // namespace

SimScenario default_scenario(std::uint64_t seed) {
  SimScenario s;
  s.seed = seed;

  auto sms = send_sms();
  sms.weight = 0.6;
  sms.corruption_rate = 0.5;
  sms.corruptions = {
      {"SignName", Corruption::Kind::Drop, std::nullopt},
      {"SignName", Corruption::Kind::Replace, FreeTextGen{5, 9, Charset::Lower}},
      {"PhoneNumbers", Corruption::Kind::Replace, ShapeGen{"ddd-dddd-dddd"}},
      {"TemplateCode", Corruption::Kind::Replace, ShapeGen{"xxx_ddddddddd"}},
  };

  ApiScenario sign;
  sign.spec = ApiSpec{"AddSmsSign",
                      {in("SignName", true), in("Remark", true), in("SignSource", true, ParamType::Integer),
                       in("SignFileList", false), in("TemplateParam", false)},
                      {out("Code"), out("Message"), out("SignName"), out("RequestId")}};
  sign.weight = 0.4;
  sign.generators = {
      {"SignName", FreeTextGen{4, 8, Charset::Lower}},
      {"Remark", FreeTextGen{6, 12, Charset::Lower}},
      {"SignSource", IntegerGen{0, 5}},
      {"SignFileList", PrefixedIdGen{"file_", 6, ".png"}},
  };
  sign.sequence_mix = {
      {{"SignName", "SignSource", "Remark", "SignFileList"}, 0.6},
      {{"SignName", "SignSource", "Remark"}, 0.4},
  };
  sign.corruption_rate = 0.4;
  sign.corruptions = {
      {"SignSource", Corruption::Kind::Replace, IntegerGen{6, 9}},
      {"Remark", Corruption::Kind::Drop, std::nullopt},
  };

  s.apis = {std::move(sms), std::move(sign)};
  s.rules = {
      {"SendSms", NotInPred{"SignName", kSignNames, true}, "isv.SMS_SIGNATURE_ILLEGAL"},
      {"SendSms", NotShapePred{"PhoneNumbers", "ddddddddddd", true}, "isv.MOBILE_NUMBER_ILLEGAL"},
      {"SendSms", NotShapePred{"TemplateCode", "XXX_ddddddddd", true}, "isv.SMS_TEMPLATE_ILLEGAL"},
      {"AddSmsSign", OutOfRangePred{"SignSource", 0, 5, true}, "isv.SIGN_SOURCE_ILLEGAL"},
      {"AddSmsSign", MissingPred{"Remark"}, "MissingRemark"},
  };
  return s;
}

SimScenario sequence_mix_scenario(std::uint64_t seed) {
  SimScenario s;
  s.seed = seed;
  s.apis = {send_sms()};
  return s;
}

nlohmann::json to_json(const SimScenario& s) {
  nlohmann::json apis = nlohmann::json::array();
  for (const auto& a : s.apis) {
    nlohmann::json gens = nlohmann::json::object();
    for (const auto& [p, g] : a.generators) gens[p] = gen_to_json(g);
    nlohmann::json mix = nlohmann::json::array();
    for (const auto& m : a.sequence_mix) {
      mix.push_back({{"params", m.params}, {"probability", m.probability}});
    }
    nlohmann::json corruptions = nlohmann::json::array();
    for (const auto& c : a.corruptions) {
      nlohmann::json cj = {{"param", c.param},
                           {"kind", c.kind == Corruption::Kind::Drop ? "drop" : "replace"}};
      if (c.replacement) cj["replacement"] = gen_to_json(*c.replacement);
      corruptions.push_back(std::move(cj));
    }
    apis.push_back({{"spec", apifk::to_json(a.spec)},
                    {"weight", a.weight},
                    {"generators", std::move(gens)},
                    {"sequence_mix", std::move(mix)},
                    {"corruption_rate", a.corruption_rate},
                    {"corruptions", std::move(corruptions)}});
  }
  nlohmann::json rules = nlohmann::json::array();
  for (const auto& r : s.rules) {
    rules.push_back({{"api", r.api}, {"when", pred_to_json(r.when)}, {"code", r.code}});
  }
  return {{"seed", s.seed},
          {"session_length", s.session_length},
          {"start_ts", s.start_ts},
          {"ts_step", s.ts_step},
          {"apis", std::move(apis)},
          {"rules", std::move(rules)}};
}

SimScenario scenario_from_json(const nlohmann::json& j) {
  SimScenario s;
  try {
    s.seed = j.value("seed", std::uint64_t{7});
    s.session_length = j.value("session_length", std::size_t{4});
    s.start_ts = j.value("start_ts", std::int64_t{1'600'000'000'000});
    s.ts_step = j.value("ts_step", std::int64_t{1'000});
    for (const auto& aj : j.at("apis")) {
      ApiScenario a;
      a.spec = api_spec_from_json(aj.at("spec"));
      a.weight = aj.value("weight", 1.0);
      for (const auto& [p, g] : aj.at("generators").items()) a.generators.emplace(p, gen_from_json(g));
      for (const auto& m : aj.at("sequence_mix")) {
        a.sequence_mix.push_back(
            {m.at("params").get<std::vector<std::string>>(), m.at("probability").get<double>()});
      }
      a.corruption_rate = aj.value("corruption_rate", 0.0);
      if (aj.contains("corruptions")) {
        for (const auto& cj : aj["corruptions"]) {
          Corruption c;
          c.param = cj.at("param").get<std::string>();
          const auto kind = cj.at("kind").get<std::string>();
          if (kind == "drop") {
            c.kind = Corruption::Kind::Drop;
          } else if (kind == "replace") {
            c.kind = Corruption::Kind::Replace;
            c.replacement = gen_from_json(cj.at("replacement"));
          } else {
            throw InvalidConfig("unknown corruption kind " + kind);
          }
          a.corruptions.push_back(std::move(c));
        }
      }
      s.apis.push_back(std::move(a));
    }
    if (j.contains("rules")) {
      for (const auto& rj : j["rules"]) {
        s.rules.push_back({rj.at("api").get<std::string>(), pred_from_json(rj.at("when")),
                           rj.at("code").get<std::string>()});
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw InvalidConfig(std::string("scenario: ") + e.what());
  }
  validate(s);
  return s;
}

SimScenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open scenario " + path);
  try {
    return scenario_from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::parse_error& e) {
    throw InvalidConfig(std::string("scenario: ") + e.what());
  }
}

}  // namespace apifk::sim
