#include "blueice/config.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "blueice/canonical.hpp"
#include "blueice/error.hpp"
#include "blueice/prng.hpp"

namespace blueice {

const FederateDescriptor* FederationConfig::find_federate(const std::string& id) const {
    auto it = std::lower_bound(federates.begin(), federates.end(), id,
                               [](const FederateDescriptor& f, const std::string& k) { return f.id < k; });
    return (it != federates.end() && it->id == id) ? &*it : nullptr;
}

std::string to_string(const Diagnostic& d) { return d.path + ": " + d.message; }

namespace {

const std::set<std::string, std::less<>> kTopLevelKeys{
    "default_link", "delay_models", "federates", "filters", "global_seed", "late_join", "links",
    "listen_address", "max_record_bytes", "max_ticks", "stations", "tick_size_ms", "tick_timeout_s",
    "topics"};

DelayKind delay_kind_from(const std::string& s) {
    if (s == "CONSTANT") return DelayKind::Constant;
    if (s == "UNIFORM") return DelayKind::Uniform;
    if (s == "EMPIRICAL") return DelayKind::Empirical;
    throw ConfigError("unknown delay model kind '" + s + "'");
}

double number_at(const Value& obj, const char* key) {
    auto it = obj.find(key);
    if (it == obj.end() || !it->is_number()) throw ConfigError(std::string("'") + key + "' must be a number");
    return it->get<double>();
}

/// Collects diagnostics while walking the document.
class Checker {
public:
    std::vector<Diagnostic> diags;

    void add(std::string path, std::string msg) { diags.push_back({std::move(path), std::move(msg)}); }

    bool expect(const Value& v, Value::value_t type, const std::string& path, const char* what) {
        const bool ok = type == Value::value_t::number_float ? v.is_number()
                        : type == Value::value_t::number_unsigned ? v.is_number_unsigned()
                                                                  : v.type() == type;
        if (!ok) add(path, std::string("expected ") + what);
        return ok;
    }

    std::set<std::string> string_set(const Value& obj, const char* key, const std::string& path) {
        std::set<std::string> out;
        auto it = obj.find(key);
        if (it == obj.end()) return out;
        const std::string p = path + "." + key;
        if (!expect(*it, Value::value_t::array, p, "a list of strings")) return out;
        for (std::size_t i = 0; i < it->size(); ++i) {
            const auto& item = (*it)[i];
            const std::string ip = p + "[" + std::to_string(i) + "]";
            if (!item.is_string()) {
                add(ip, "expected a string");
            } else if (!out.insert(item.get<std::string>()).second) {
                add(ip, "duplicate entry '" + item.get<std::string>() + "'");
            }
        }
        return out;
    }

    void check_model(const Value& v, const std::string& path) {
        if (!v.is_object()) {
            add(path, "delay model must be an object");
            return;
        }
        try {
            parse_delay_model(v);
        } catch (const ConfigError& e) {
            add(path, e.what());
        }
    }

    void check_probability(const Value& obj, const char* key, const std::string& path) {
        auto it = obj.find(key);
        if (it == obj.end()) return;
        if (!it->is_number()) {
            add(path + "." + key, "expected a number");
            return;
        }
        const double p = it->get<double>();
        if (!(p >= 0.0 && p <= 1.0)) add(path + "." + key, "loss probability " + format_number_safe(p) + " outside [0, 1]");
    }

    static std::string format_number_safe(double v) {
        std::ostringstream ss;
        ss << v;
        return ss.str();
    }
};

}  // namespace

DelayModel parse_delay_model(const Value& v) {
    if (!v.is_object()) throw ConfigError("delay model must be an object");
    auto kind_it = v.find("kind");
    if (kind_it == v.end() || !kind_it->is_string()) throw ConfigError("delay model needs a string 'kind'");
    switch (delay_kind_from(kind_it->get<std::string>())) {
        case DelayKind::Constant:
            return DelayModel::constant(number_at(v, "constant_ms"));
        case DelayKind::Uniform:
            return DelayModel::uniform(number_at(v, "low_ms"), number_at(v, "high_ms"));
        case DelayKind::Empirical: {
            auto it = v.find("samples_ms");
            if (it == v.end() || !it->is_array()) throw ConfigError("'samples_ms' must be a list of numbers");
            std::vector<double> samples;
            for (const auto& s : *it) {
                if (!s.is_number()) throw ConfigError("'samples_ms' must be a list of numbers");
                samples.push_back(s.get<double>());
            }
            return DelayModel::empirical(std::move(samples));
        }
    }
    throw ConfigError("unreachable");
}

Value delay_model_to_value(const DelayModel& m) {
    switch (m.kind) {
        case DelayKind::Constant: return {{"kind", "CONSTANT"}, {"constant_ms", m.constant_ms}};
        case DelayKind::Uniform: return {{"kind", "UNIFORM"}, {"low_ms", m.low_ms}, {"high_ms", m.high_ms}};
        case DelayKind::Empirical: return {{"kind", "EMPIRICAL"}, {"samples_ms", m.samples_ms}};
    }
    return nullptr;
}

std::vector<Diagnostic> validate_config(const Value& doc) {
    Checker c;
    if (!doc.is_object()) {
        c.add("$", "config must be an object");
        return c.diags;
    }
    for (const auto& [key, _] : doc.items()) {
        if (!kTopLevelKeys.contains(key)) c.add(key, "unknown key");
    }

    if (auto it = doc.find("tick_size_ms"); it != doc.end()) {
        if (c.expect(*it, Value::value_t::number_float, "tick_size_ms", "a number") && !(it->get<double>() > 0.0))
            c.add("tick_size_ms", "must be positive");
    }
    if (auto it = doc.find("max_ticks"); it != doc.end())
        c.expect(*it, Value::value_t::number_unsigned, "max_ticks", "a non-negative integer");
    if (auto it = doc.find("global_seed"); it != doc.end())
        c.expect(*it, Value::value_t::number_unsigned, "global_seed", "a non-negative integer");
    if (auto it = doc.find("listen_address"); it != doc.end())
        c.expect(*it, Value::value_t::string, "listen_address", "a host:port string");
    if (auto it = doc.find("tick_timeout_s"); it != doc.end()) {
        if (c.expect(*it, Value::value_t::number_float, "tick_timeout_s", "a number") && !(it->get<double>() > 0.0))
            c.add("tick_timeout_s", "must be positive");
    }
    if (auto it = doc.find("late_join"); it != doc.end()) {
        if (c.expect(*it, Value::value_t::boolean, "late_join", "a boolean") && it->get<bool>())
            c.add("late_join", "late join is not supported");
    }
    if (auto it = doc.find("max_record_bytes"); it != doc.end())
        c.expect(*it, Value::value_t::number_unsigned, "max_record_bytes", "a non-negative integer");

    // Federates.
    std::set<std::string> fed_ids;
    std::set<std::string> positioned;
    std::map<std::string, std::pair<std::set<std::string>, std::set<std::string>>> declared;
    if (auto it = doc.find("federates"); it == doc.end()) {
        c.add("federates", "missing required list");
    } else if (c.expect(*it, Value::value_t::array, "federates", "a list")) {
        for (std::size_t i = 0; i < it->size(); ++i) {
            const auto& f = (*it)[i];
            const std::string p = "federates[" + std::to_string(i) + "]";
            if (!c.expect(f, Value::value_t::object, p, "an object")) continue;
            for (const auto& [key, _] : f.items()) {
                static const std::set<std::string> keys{"id", "launch", "position", "publishes", "subscribes", "token"};
                if (!keys.contains(key)) c.add(p + "." + key, "unknown key");
            }
            std::string id;
            if (auto idit = f.find("id"); idit == f.end() || !idit->is_string() || idit->get<std::string>().empty()) {
                c.add(p + ".id", "federate needs a non-empty string id");
            } else {
                id = idit->get<std::string>();
                if (!fed_ids.insert(id).second) c.add(p + ".id", "duplicate federate id '" + id + "'");
            }
            if (auto tit = f.find("token"); tit == f.end() || !tit->is_string())
                c.add(p + ".token", "federate needs a string token");
            if (auto pit = f.find("position"); pit != f.end()) {
                if (!pit->is_array() || pit->size() != 2 || !(*pit)[0].is_number() || !(*pit)[1].is_number())
                    c.add(p + ".position", "expected [x, y]");
                else if (!id.empty())
                    positioned.insert(id);
            }
            if (auto lit = f.find("launch"); lit != f.end() && !lit->is_null()) {
                if (!lit->is_object() || !lit->contains("command") || !(*lit)["command"].is_string())
                    c.add(p + ".launch", "launch needs a string 'command'");
            }
            auto pubs = c.string_set(f, "publishes", p);
            auto subs = c.string_set(f, "subscribes", p);
            if (!id.empty()) declared[id] = {std::move(pubs), std::move(subs)};
        }
    }

    // Topics and access policies.
    std::set<std::string> topic_names;
    if (auto it = doc.find("topics"); it == doc.end()) {
        c.add("topics", "missing required list");
    } else if (c.expect(*it, Value::value_t::array, "topics", "a list")) {
        for (std::size_t i = 0; i < it->size(); ++i) {
            const auto& t = (*it)[i];
            const std::string p = "topics[" + std::to_string(i) + "]";
            if (!c.expect(t, Value::value_t::object, p, "an object")) continue;
            for (const auto& [key, _] : t.items()) {
                static const std::set<std::string> keys{"allowed_publishers", "allowed_subscribers", "name"};
                if (!keys.contains(key)) c.add(p + "." + key, "unknown key");
            }
            auto nit = t.find("name");
            if (nit == t.end() || !nit->is_string() || nit->get<std::string>().empty()) {
                c.add(p + ".name", "topic needs a non-empty string name");
            } else if (!topic_names.insert(nit->get<std::string>()).second) {
                c.add(p + ".name", "duplicate policy for topic '" + nit->get<std::string>() + "'");
            }
            for (const char* key : {"allowed_publishers", "allowed_subscribers"}) {
                c.string_set(t, key, p);
                std::size_t j = 0;
                for (const auto& item : t.value(key, Value::array())) {
                    if (item.is_string() && !fed_ids.contains(item.get<std::string>()))
                        c.add(p + "." + key + "[" + std::to_string(j) + "]",
                              "unknown federate '" + item.get<std::string>() + "'");
                    ++j;
                }
            }
        }
    }
    for (const auto& [id, ps] : declared) {
        for (const auto& t : ps.first)
            if (!topic_names.contains(t)) c.add("federates[" + id + "].publishes", "unknown topic '" + t + "'");
        for (const auto& t : ps.second)
            if (!topic_names.contains(t)) c.add("federates[" + id + "].subscribes", "unknown topic '" + t + "'");
    }

    // Filters.
    if (auto it = doc.find("filters"); it != doc.end() && c.expect(*it, Value::value_t::array, "filters", "a list")) {
        for (std::size_t i = 0; i < it->size(); ++i) {
            const auto& f = (*it)[i];
            const std::string p = "filters[" + std::to_string(i) + "]";
            if (!c.expect(f, Value::value_t::object, p, "an object")) continue;
            auto tit = f.find("topic");
            if (tit == f.end() || !tit->is_string()) c.add(p + ".topic", "expected a string");
            else if (!topic_names.contains(tit->get<std::string>()))
                c.add(p + ".topic", "unknown topic '" + tit->get<std::string>() + "'");
            auto fit = f.find("field_path");
            if (fit == f.end() || !fit->is_string() || fit->get<std::string>().empty())
                c.add(p + ".field_path", "expected a non-empty string");
            auto rit = f.find("required_value");
            if (rit == f.end() || rit->is_structured() || rit->is_null())
                c.add(p + ".required_value", "expected a scalar");
        }
    }

    // Delay models.
    std::set<std::string> model_names;
    if (auto it = doc.find("delay_models"); it != doc.end() &&
                                            c.expect(*it, Value::value_t::object, "delay_models", "an object")) {
        for (const auto& [name, m] : it->items()) {
            if (name == kStationNearest) c.add("delay_models." + name, "reserved model name");
            model_names.insert(name);
            c.check_model(m, "delay_models." + name);
        }
    }
    auto check_model_ref = [&](const Value& v, const std::string& path, bool allow_nearest) {
        if (v.is_string()) {
            const auto name = v.get<std::string>();
            if (name == kStationNearest) {
                if (!allow_nearest) c.add(path, "STATION_NEAREST not allowed here");
            } else if (!model_names.contains(name)) {
                c.add(path, "unknown delay model '" + name + "'");
            }
        } else {
            c.check_model(v, path);
        }
    };

    // Stations.
    bool have_stations = false;
    if (auto it = doc.find("stations"); it != doc.end() && c.expect(*it, Value::value_t::array, "stations", "a list")) {
        std::set<std::string> ids;
        for (std::size_t i = 0; i < it->size(); ++i) {
            const auto& s = (*it)[i];
            const std::string p = "stations[" + std::to_string(i) + "]";
            if (!c.expect(s, Value::value_t::object, p, "an object")) continue;
            have_stations = true;
            auto idit = s.find("id");
            if (idit == s.end() || !idit->is_string() || idit->get<std::string>().empty())
                c.add(p + ".id", "station needs a non-empty string id");
            else if (!ids.insert(idit->get<std::string>()).second)
                c.add(p + ".id", "duplicate station id '" + idit->get<std::string>() + "'");
            auto pit = s.find("position");
            if (pit == s.end() || !pit->is_array() || pit->size() != 2 || !(*pit)[0].is_number() ||
                !(*pit)[1].is_number())
                c.add(p + ".position", "expected [x, y]");
            if (auto dit = s.find("delay"); dit == s.end()) c.add(p + ".delay", "missing delay model");
            else check_model_ref(*dit, p + ".delay", false);
            c.check_probability(s, "loss_probability", p);
        }
    }

    // Links.
    auto check_link = [&](const Value& l, const std::string& p, bool is_default) {
        if (!c.expect(l, Value::value_t::object, p, "an object")) return;
        if (!is_default) {
            auto tit = l.find("topic");
            if (tit == l.end() || !tit->is_string()) c.add(p + ".topic", "expected a string");
            else if (!topic_names.contains(tit->get<std::string>()))
                c.add(p + ".topic", "unknown topic '" + tit->get<std::string>() + "'");
            for (const char* key : {"src", "dst"}) {
                if (auto fit = l.find(key); fit != l.end()) {
                    if (!fit->is_string()) c.add(p + "." + key, "expected a string");
                    else if (!fed_ids.contains(fit->get<std::string>()))
                        c.add(p + "." + key, "unknown federate '" + fit->get<std::string>() + "'");
                }
            }
        }
        if (auto mit = l.find("model"); mit != l.end()) {
            check_model_ref(*mit, p + ".model", true);
            if (mit->is_string() && mit->get<std::string>() == kStationNearest) {
                if (!have_stations) c.add(p + ".model", "STATION_NEAREST needs at least one station");
                if (auto sit = l.find("src"); sit != l.end() && sit->is_string() &&
                                              fed_ids.contains(sit->get<std::string>()) &&
                                              !positioned.contains(sit->get<std::string>()))
                    c.add(p + ".src", "STATION_NEAREST publisher '" + sit->get<std::string>() +
                                          "' needs a configured position");
            }
        }
        c.check_probability(l, "loss_probability", p);
    };
    if (auto it = doc.find("links"); it != doc.end() && c.expect(*it, Value::value_t::array, "links", "a list")) {
        for (std::size_t i = 0; i < it->size(); ++i) check_link((*it)[i], "links[" + std::to_string(i) + "]", false);
    }
    if (auto it = doc.find("default_link"); it != doc.end()) check_link(*it, "default_link", true);

    return c.diags;
}

namespace {

Position position_of(const Value& v) { return {v[0].get<double>(), v[1].get<double>()}; }

std::set<std::string> set_of(const Value& obj, const char* key) {
    std::set<std::string> out;
    for (const auto& item : obj.value(key, Value::array())) out.insert(item.get<std::string>());
    return out;
}

DelayModel resolve_model(const Value& ref, const std::map<std::string, DelayModel>& named) {
    if (ref.is_string()) return named.at(ref.get<std::string>());
    return parse_delay_model(ref);
}

LinkRule parse_link(const Value& l, std::map<std::string, DelayModel>& models, std::size_t index) {
    LinkRule r;
    r.topic = l.value("topic", "");
    r.src = l.value("src", "");
    r.dst = l.value("dst", "");
    if (auto mit = l.find("model"); mit != l.end()) {
        if (mit->is_string()) {
            r.model = mit->get<std::string>();
        } else {
            r.model = "#link" + std::to_string(index);
            models[r.model] = parse_delay_model(*mit);
        }
    }
    if (auto pit = l.find("loss_probability"); pit != l.end()) r.loss_probability = pit->get<double>();
    return r;
}

}  // namespace

FederationConfig parse_config(const Value& doc) {
    if (auto diags = validate_config(doc); !diags.empty()) {
        std::string msg = "invalid federation config:";
        for (const auto& d : diags) msg += "\n  " + to_string(d);
        throw ConfigError(msg);
    }
    FederationConfig cfg;
    cfg.document = doc;
    cfg.tick_size_ms = doc.value("tick_size_ms", cfg.tick_size_ms);
    cfg.max_ticks = doc.value("max_ticks", cfg.max_ticks);
    cfg.global_seed = doc.value("global_seed", cfg.global_seed);
    cfg.listen_address = doc.value("listen_address", cfg.listen_address);
    cfg.tick_timeout_s = doc.value("tick_timeout_s", cfg.tick_timeout_s);
    cfg.late_join = doc.value("late_join", cfg.late_join);
    cfg.max_record_bytes = doc.value("max_record_bytes", cfg.max_record_bytes);

    for (const auto& f : doc["federates"]) {
        FederateDescriptor d;
        d.id = f["id"].get<std::string>();
        d.token = f["token"].get<std::string>();
        d.publishes = set_of(f, "publishes");
        d.subscribes = set_of(f, "subscribes");
        if (f.contains("position")) d.position = position_of(f["position"]);
        d.launch = f.value("launch", Value());
        cfg.federates.push_back(std::move(d));
    }
    std::sort(cfg.federates.begin(), cfg.federates.end(),
              [](const auto& a, const auto& b) { return a.id < b.id; });

    for (const auto& t : doc["topics"]) {
        AccessPolicy p;
        p.topic = t["name"].get<std::string>();
        p.allowed_publishers = set_of(t, "allowed_publishers");
        p.allowed_subscribers = set_of(t, "allowed_subscribers");
        cfg.policies.emplace(p.topic, std::move(p));
    }
    for (const auto& f : doc.value("filters", Value::array())) {
        cfg.filters.push_back({f["topic"].get<std::string>(), f["field_path"].get<std::string>(), f["required_value"]});
    }
    const Value models = doc.value("delay_models", Value::object());
    for (const auto& [name, m] : models.items()) {
        cfg.delay_models.emplace(name, parse_delay_model(m));
    }
    for (const auto& s : doc.value("stations", Value::array())) {
        LatencyStation st;
        st.id = s["id"].get<std::string>();
        st.position = position_of(s["position"]);
        st.delay = resolve_model(s["delay"], cfg.delay_models);
        st.loss_probability = s.value("loss_probability", 0.0);
        cfg.stations.push_back(std::move(st));
    }
    std::size_t index = 0;
    for (const auto& l : doc.value("links", Value::array())) {
        cfg.links.push_back(parse_link(l, cfg.delay_models, index++));
    }
    if (auto it = doc.find("default_link"); it != doc.end()) {
        LinkRule r = parse_link(*it, cfg.delay_models, index++);
        r.topic.clear();
        r.src.clear();
        r.dst.clear();
        cfg.links.push_back(std::move(r));
    }
    return cfg;
}

Value load_document(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open config: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    try {
        return decode_value(ss.str());
    } catch (const DecodeError& e) {
        throw ConfigError(path + ": " + e.what());
    }
}

FederationConfig load_config(const std::string& path) { return parse_config(load_document(path)); }

std::uint64_t config_hash(const Value& document) {
    Value stripped = document;
    if (stripped.is_object()) {
        stripped.erase("listen_address");
        if (auto it = stripped.find("federates"); it != stripped.end() && it->is_array()) {
            for (auto& f : *it) {
                if (f.is_object()) f.erase("launch");
            }
        }
    }
    return fnv1a64(encode_value(stripped));
}

std::string hash_hex(std::uint64_t h) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace blueice
