#include "tla/ddi.hpp"

#include "tla/xml.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <set>

namespace tla::ddi {

SchemaError::SchemaError(const std::string& message, int line)
    : std::runtime_error("line " + std::to_string(line) + ": " + message), line_(line) {}

IntegrityLevel parse_integrity_level(std::string_view token) {
  if (token == "QM") return IntegrityLevel::QM;
  if (token == "A") return IntegrityLevel::A;
  if (token == "B") return IntegrityLevel::B;
  if (token == "C") return IntegrityLevel::C;
  if (token == "D") return IntegrityLevel::D;
  throw SchemaError("unknown IntegrityLevel '" + std::string(token) + "'", 0);
}

const char* to_string(IntegrityLevel level) {
  switch (level) {
    case IntegrityLevel::QM: return "QM";
    case IntegrityLevel::A: return "A";
    case IntegrityLevel::B: return "B";
    case IntegrityLevel::C: return "C";
    case IntegrityLevel::D: return "D";
  }
  return "?";
}

const char* to_string(DemandKind kind) {
  switch (kind) {
    case DemandKind::configuration: return "configuration";
    case DemandKind::platform_service: return "platform_service";
    case DemandKind::health_monitoring: return "health_monitoring";
  }
  return "?";
}

void CapabilitySet::validate() const {
  auto check = [](const auto& items, auto key, const char* what) {
    std::set<std::string> seen;
    for (const auto& item : items) {
      if (!seen.insert(key(item)).second) {
        throw std::invalid_argument(std::string("capabilities.") + what +
                                    ": duplicate entry '" + key(item) + "'");
      }
    }
  };
  check(offered, [](const OfferedConfiguration& c) { return c.name; }, "offered");
  check(platform_reactions, [](const PlatformReaction& p) { return p.failure; },
        "platform_reactions");
  check(health_monitors,
        [](const HealthMonitor& h) { return h.application + "\n" + h.resource; },
        "health_monitors");
  for (const auto& p : platform_reactions) {
    if (!(p.max_error_percent >= 0.0)) {
      throw std::invalid_argument("capabilities.platform_reactions: max_error_percent must be >= 0");
    }
  }
  for (const auto& h : health_monitors) {
    if (!(h.detection_threshold_ms >= 0.0)) {
      throw std::invalid_argument(
          "capabilities.health_monitors: detection_threshold_ms must be >= 0");
    }
  }
}

namespace {

// Trims and collapses internal whitespace runs to one space.
std::string normalize(std::string_view s) {
  std::string out;
  bool pending_space = false;
  for (char c : s) {
    if (c == ' ' || c == '\t' || c == '\n' || c == '\r') {
      pending_space = !out.empty();
    } else {
      if (pending_space) out += ' ';
      pending_space = false;
      out += c;
    }
  }
  return out;
}

// First decimal number in the text, e.g. "3 %" or "more than 10 ms".
std::optional<std::pair<double, std::string_view>> leading_number(std::string_view s) {
  const auto start = s.find_first_of("0123456789");
  if (start == std::string_view::npos) return std::nullopt;
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data() + start, s.data() + s.size(), value);
  if (ec != std::errc() || !std::isfinite(value)) return std::nullopt;
  std::string_view rest = s.substr(static_cast<std::size_t>(ptr - s.data()));
  while (!rest.empty() && rest.front() == ' ') rest.remove_prefix(1);
  return std::make_pair(value, rest);
}

double parse_percent(const std::string& text, int line) {
  const auto num = leading_number(text);
  if (!num || num->second != "%") {
    throw SchemaError("<Error> must be a percentage, got '" + text + "'", line);
  }
  return num->first;
}

double parse_latency_ms(const std::string& text, int line) {
  const auto num = leading_number(text);
  if (num) {
    if (num->second == "ms") return num->first;
    if (num->second == "s") return num->first * 1000.0;
    if (num->second == "us") return num->first / 1000.0;
  }
  throw SchemaError("<Latency> must be a duration in ms, s or us, got '" + text + "'", line);
}

class Reader {
 public:
  Reader(const xml::Element& el, std::initializer_list<const char*> allowed) : el_(el) {
    if (!el.attributes.empty()) {
      throw SchemaError("attributes are not allowed on <" + el.name + ">", el.line);
    }
    if (!normalize(el.text).empty()) {
      throw SchemaError("unexpected text in <" + el.name + ">", el.line);
    }
    for (const auto& child : el.children) {
      const bool known = std::any_of(allowed.begin(), allowed.end(),
                                     [&](const char* a) { return child.name == a; });
      if (!known) {
        throw SchemaError("unknown tag <" + child.name + "> in <" + el.name + ">", child.line);
      }
    }
  }

  const xml::Element* optional_child(const char* name) const {
    const xml::Element* found = nullptr;
    for (const auto& child : el_.children) {
      if (child.name != name) continue;
      if (found) throw SchemaError("duplicate <" + child.name + "> in <" + el_.name + ">", child.line);
      found = &child;
    }
    return found;
  }

  const xml::Element& child(const char* name) const {
    const xml::Element* c = optional_child(name);
    if (!c) throw SchemaError("missing required tag <" + std::string(name) + "> in <" + el_.name + ">", el_.line);
    return *c;
  }

  std::string text(const char* name) const { return leaf_text(child(name)); }

  static std::string leaf_text(const xml::Element& leaf) {
    if (!leaf.attributes.empty()) {
      throw SchemaError("attributes are not allowed on <" + leaf.name + ">", leaf.line);
    }
    if (!leaf.children.empty()) {
      throw SchemaError("unexpected tag <" + leaf.children.front().name + "> in <" +
                            leaf.name + ">",
                        leaf.children.front().line);
    }
    std::string value = normalize(leaf.text);
    if (value.empty()) throw SchemaError("empty <" + leaf.name + ">", leaf.line);
    return value;
  }

  IntegrityLevel level() const {
    const xml::Element& leaf = child("IntegrityLevel");
    const std::string token = leaf_text(leaf);
    try {
      return parse_integrity_level(token);
    } catch (const SchemaError&) {
      throw SchemaError("unknown IntegrityLevel '" + token + "'", leaf.line);
    }
  }

  const xml::Element& element() const { return el_; }

 private:
  const xml::Element& el_;
};

Demand read_demand(const xml::Element& el) {
  Reader r(el, {"ConfigurationName", "IntegrityLevel", "Platform_Service", "HealthMonitoring"});
  Demand d;
  const bool config = r.optional_child("ConfigurationName") || r.optional_child("IntegrityLevel");
  const auto* platform = r.optional_child("Platform_Service");
  const auto* health = r.optional_child("HealthMonitoring");
  const int forms = int(config) + int(platform != nullptr) + int(health != nullptr);
  if (forms != 1) {
    throw SchemaError(
        "<Demand> must hold exactly one of ConfigurationName/IntegrityLevel, "
        "<Platform_Service> or <HealthMonitoring>",
        el.line);
  }
  if (config) {
    d.kind = DemandKind::configuration;
    d.name = r.text("ConfigurationName");
    d.integrity_level = r.level();
  } else if (platform) {
    Reader p(*platform, {"Failure", "Reaction", "IntegrityLevel", "Error"});
    d.kind = DemandKind::platform_service;
    d.name = p.text("Failure");
    d.reaction = p.text("Reaction");
    d.integrity_level = p.level();
    d.error_text = p.text("Error");
    d.error_percent = parse_percent(d.error_text, p.child("Error").line);
  } else {
    Reader h(*health, {"Failure", "IntegrityLevel"});
    Reader f(h.child("Failure"), {"Application", "ApplicationResourceName", "Latency"});
    d.kind = DemandKind::health_monitoring;
    d.name = f.text("Application");
    d.resource = f.text("ApplicationResourceName");
    d.latency_text = f.text("Latency");
    d.latency_ms = parse_latency_ms(d.latency_text, f.child("Latency").line);
    d.integrity_level = h.level();
  }
  return d;
}

void line(std::string& out, int indent, const char* tag, const std::string& value) {
  out.append(static_cast<std::size_t>(indent) * 2, ' ');
  out += '<';
  out += tag;
  out += "> ";
  out += xml::escape(value);
  out += " </";
  out += tag;
  out += ">\n";
}

void open(std::string& out, int indent, const char* tag) {
  out.append(static_cast<std::size_t>(indent) * 2, ' ');
  out += '<';
  out += tag;
  out += ">\n";
}

void close(std::string& out, int indent, const char* tag) {
  out.append(static_cast<std::size_t>(indent) * 2, ' ');
  out += "</";
  out += tag;
  out += ">\n";
}

}  // namespace

DdiContract parse_ddi(std::string_view document) {
  const xml::Element root = xml::parse(document);
  if (root.name != "DDI") {
    throw SchemaError("root element must be <DDI>, got <" + root.name + ">", root.line);
  }
  Reader r(root, {"ComponentName", "Guarantee"});
  DdiContract c;
  c.component_name = r.text("ComponentName");

  Reader g(r.child("Guarantee"),
           {"ConfigurationName", "IntegrityLevel", "SecurityProperty", "DemandSet"});
  c.guarantee.configuration_name = g.text("ConfigurationName");
  c.guarantee.integrity_level = g.level();
  if (const auto* sp = g.optional_child("SecurityProperty")) {
    const std::string text = Reader::leaf_text(*sp);
    int value = -1;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc() || ptr != text.data() + text.size() || value < 0) {
      throw SchemaError("<SecurityProperty> must be a non-negative integer", sp->line);
    }
    c.guarantee.security_property = value;
  }
  if (const auto* ds = g.optional_child("DemandSet")) {
    Reader set(*ds, {"Demand"});
    for (const auto& d : ds->children) c.guarantee.demands.push_back(read_demand(d));
  }
  return c;
}

std::string serialize(const DdiContract& contract) {
  std::string out;
  open(out, 0, "DDI");
  line(out, 1, "ComponentName", contract.component_name);
  open(out, 1, "Guarantee");
  const Guarantee& g = contract.guarantee;
  line(out, 2, "ConfigurationName", g.configuration_name);
  line(out, 2, "IntegrityLevel", to_string(g.integrity_level));
  line(out, 2, "SecurityProperty", std::to_string(g.security_property));
  open(out, 2, "DemandSet");
  for (const Demand& d : g.demands) {
    open(out, 3, "Demand");
    switch (d.kind) {
      case DemandKind::configuration:
        line(out, 4, "ConfigurationName", d.name);
        line(out, 4, "IntegrityLevel", to_string(d.integrity_level));
        break;
      case DemandKind::platform_service:
        open(out, 4, "Platform_Service");
        line(out, 5, "Failure", d.name);
        line(out, 5, "Reaction", d.reaction);
        line(out, 5, "IntegrityLevel", to_string(d.integrity_level));
        line(out, 5, "Error", d.error_text);
        close(out, 4, "Platform_Service");
        break;
      case DemandKind::health_monitoring:
        open(out, 4, "HealthMonitoring");
        open(out, 5, "Failure");
        line(out, 6, "Application", d.name);
        line(out, 6, "ApplicationResourceName", d.resource);
        line(out, 6, "Latency", d.latency_text);
        close(out, 5, "Failure");
        line(out, 5, "IntegrityLevel", to_string(d.integrity_level));
        close(out, 4, "HealthMonitoring");
        break;
    }
    close(out, 3, "Demand");
  }
  close(out, 2, "DemandSet");
  close(out, 1, "Guarantee");
  close(out, 0, "DDI");
  return out;
}

bool satisfies(const Demand& d, const CapabilitySet& caps) {
  switch (d.kind) {
    case DemandKind::configuration:
      return std::any_of(caps.offered.begin(), caps.offered.end(), [&](const auto& c) {
        return c.name == d.name && c.integrity_level >= d.integrity_level;
      });
    case DemandKind::platform_service:
      return std::any_of(caps.platform_reactions.begin(), caps.platform_reactions.end(),
                         [&](const auto& c) {
                           return c.failure == d.name && c.reaction == d.reaction &&
                                  c.integrity_level >= d.integrity_level &&
                                  c.max_error_percent <= d.error_percent;
                         });
    case DemandKind::health_monitoring:
      // The demand names a failure (latency above a threshold); a monitor
      // covers it when it flags at least that range.
      return std::any_of(caps.health_monitors.begin(), caps.health_monitors.end(),
                         [&](const auto& c) {
                           return c.application == d.name && c.resource == d.resource &&
                                  c.integrity_level >= d.integrity_level &&
                                  c.detection_threshold_ms <= d.latency_ms;
                         });
  }
  return false;
}

Evaluation evaluate(const DdiContract& contract, const CapabilitySet& capabilities) {
  Evaluation e;
  for (const Demand& d : contract.guarantee.demands) {
    if (!satisfies(d, capabilities)) e.unmet.push_back(d);
  }
  e.accepted = e.unmet.empty();
  return e;
}

}  // namespace tla::ddi
