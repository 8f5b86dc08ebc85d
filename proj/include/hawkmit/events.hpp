#pragma once

#include "hawkmit/common.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace hawkmit {

struct Event {
    double t = 0.0;
    int node = 0;
    EventTag tag = EventTag::F;
};

/// Time-ordered event records over one observation window. Ties keep
/// insertion order.
struct EventLog {
    std::vector<Event> events;
    double t_start = 0.0;
    double t_end = 0.0;

    void append(double t, int node, EventTag tag);
    std::size_t size() const { return events.size(); }
    bool empty() const { return events.empty(); }

    /// Per-node event counts, optionally restricted to one process.
    Vector counts(int n, EventTag tag) const;
    Vector counts(int n) const;

    /// Merge keeping global time order (stable for ties).
    static EventLog merged(const EventLog& a, const EventLog& b);
};

/// JSON Lines: a header record with the window bounds followed by one
/// record per event {"t":..., "node":..., "tag":"F"|"M"}.
void write_jsonl(const EventLog& log, std::ostream& out);
std::string to_jsonl(const EventLog& log);
EventLog read_jsonl(std::istream& in);
EventLog from_jsonl(const std::string& text);

}  // namespace hawkmit
