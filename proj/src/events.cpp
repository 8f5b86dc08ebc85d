#include "hawkmit/events.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <sstream>
#include <stdexcept>

namespace hawkmit {

void EventLog::append(double t, int node, EventTag tag) {
    if (!events.empty() && t < events.back().t) {
        throw std::invalid_argument("EventLog: event times must be nondecreasing");
    }
    if (t < t_start || t > t_end) {
        throw std::invalid_argument("EventLog: event outside window");
    }
    events.push_back(Event{t, node, tag});
}

Vector EventLog::counts(int n, EventTag tag) const {
    Vector z = Vector::Zero(n);
    for (const Event& e : events) {
        if (e.tag == tag) z[e.node] += 1.0;
    }
    return z;
}

Vector EventLog::counts(int n) const {
    Vector z = Vector::Zero(n);
    for (const Event& e : events) z[e.node] += 1.0;
    return z;
}

EventLog EventLog::merged(const EventLog& a, const EventLog& b) {
    EventLog out;
    out.t_start = std::min(a.t_start, b.t_start);
    out.t_end = std::max(a.t_end, b.t_end);
    out.events.reserve(a.events.size() + b.events.size());
    std::merge(a.events.begin(), a.events.end(), b.events.begin(), b.events.end(),
               std::back_inserter(out.events),
               [](const Event& x, const Event& y) { return x.t < y.t; });
    return out;
}

void write_jsonl(const EventLog& log, std::ostream& out) {
    nlohmann::json header;
    header["t_start"] = log.t_start;
    header["t_end"] = log.t_end;
    out << header.dump() << '\n';
    for (const Event& e : log.events) {
        nlohmann::json j;
        j["t"] = e.t;
        j["node"] = e.node;
        j["tag"] = to_string(e.tag);
        out << j.dump() << '\n';
    }
}

std::string to_jsonl(const EventLog& log) {
    std::ostringstream out;
    write_jsonl(log, out);
    return out.str();
}

EventLog read_jsonl(std::istream& in) {
    EventLog log;
    std::string line;
    bool have_header = false;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const nlohmann::json j = nlohmann::json::parse(line);
        if (!have_header) {
            log.t_start = j.at("t_start").get<double>();
            log.t_end = j.at("t_end").get<double>();
            have_header = true;
            continue;
        }
        const std::string tag = j.at("tag").get<std::string>();
        log.append(j.at("t").get<double>(), j.at("node").get<int>(),
                   tag == "F" ? EventTag::F : EventTag::M);
    }
    if (!have_header) throw std::invalid_argument("EventLog: missing header record");
    return log;
}

EventLog from_jsonl(const std::string& text) {
    std::istringstream in(text);
    return read_jsonl(in);
}

}  // namespace hawkmit
