#pragma once

// Voice-control state machine. Commands only run after the wake word; the
// listening window closes after a command or after more than five seconds.
//
//   Sleeping  --wake word-->  Listening(t)
//   Listening --left|right|out|both|open-->  Sleeping + action
//   Listening --save-->  Dictating("")
//   Dictating --ok-->  Sleeping + SaveSnapshot(buffer)
//   Dictating --other-->  Dictating(buffer + token)
//
// The clock is injected; nothing here reads the system time.

#include <cctype>
#include <chrono>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace ccd::voice {

/// Monotonic time since an arbitrary origin.
using Timestamp = std::chrono::nanoseconds;

struct Sleeping {
    friend bool operator==(const Sleeping&, const Sleeping&) = default;
};

struct Listening {
    Timestamp activated_at{};
    friend bool operator==(const Listening&, const Listening&) = default;
};

struct Dictating {
    std::string buffer;
    friend bool operator==(const Dictating&, const Dictating&) = default;
};

using VoiceState = std::variant<Sleeping, Listening, Dictating>;

struct ZoomLeft {
    friend bool operator==(const ZoomLeft&, const ZoomLeft&) = default;
};
struct ZoomRight {
    friend bool operator==(const ZoomRight&, const ZoomRight&) = default;
};
struct ZoomOut {
    friend bool operator==(const ZoomOut&, const ZoomOut&) = default;
};
struct OpenNext {
    friend bool operator==(const OpenNext&, const OpenNext&) = default;
};
struct SaveSnapshot {
    std::string note;
    friend bool operator==(const SaveSnapshot&, const SaveSnapshot&) = default;
};

using VoiceAction = std::variant<ZoomLeft, ZoomRight, ZoomOut, OpenNext, SaveSnapshot>;

enum class Indicator { Idle, Active };

struct FsmConfig {
    std::string wake_word = "activate";
    Timestamp timeout = std::chrono::seconds(5);
    std::size_t max_dictation_chars = 2000;
};

struct StepResult {
    VoiceState state;
    std::optional<VoiceAction> action;

    friend bool operator==(const StepResult&, const StepResult&) = default;
};

/// Lowercases ASCII and drops punctuation and surrounding whitespace.
inline std::string normalize_token(std::string_view token) {
    std::string out;
    for (char c : token) {
        const auto u = static_cast<unsigned char>(c);
        if (std::ispunct(u)) continue;
        out += static_cast<char>(std::tolower(u));
    }
    const auto first = out.find_first_not_of(" \t\r\n");
    if (first == std::string::npos) return {};
    const auto last = out.find_last_not_of(" \t\r\n");
    return out.substr(first, last - first + 1);
}

/// Trimmed token as it will appear in dictated text.
inline std::string trim(std::string_view token) {
    const auto first = token.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) return {};
    const auto last = token.find_last_not_of(" \t\r\n");
    return std::string(token.substr(first, last - first + 1));
}

/// Splits transcriber output into whitespace-delimited tokens, in order.
inline std::vector<std::string> split_tokens(std::string_view text) {
    std::vector<std::string> out;
    std::size_t i = 0;
    while (i < text.size()) {
        while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
        std::size_t j = i;
        while (j < text.size() && !std::isspace(static_cast<unsigned char>(text[j]))) ++j;
        if (j > i) out.emplace_back(text.substr(i, j - i));
        i = j;
    }
    return out;
}

/// Listening windows older than the timeout collapse to Sleeping.
inline VoiceState tick(const VoiceState& state, Timestamp now, const FsmConfig& config = {}) {
    if (const auto* l = std::get_if<Listening>(&state)) {
        if (now - l->activated_at > config.timeout) return Sleeping{};
    }
    return state;
}

inline StepResult step(const VoiceState& state, std::string_view token, Timestamp now, const FsmConfig& config = {}) {
    const VoiceState current = tick(state, now, config);
    const std::string word = normalize_token(token);

    if (const auto* d = std::get_if<Dictating>(&current)) {
        if (word == "ok") return {Sleeping{}, SaveSnapshot{d->buffer}};
        const std::string text = trim(token);
        if (text.empty()) return {current, std::nullopt};
        Dictating next = *d;
        const std::size_t extra = text.size() + (next.buffer.empty() ? 0 : 1);
        if (next.buffer.size() + extra <= config.max_dictation_chars) {
            if (!next.buffer.empty()) next.buffer += ' ';
            next.buffer += text;
        }
        return {std::move(next), std::nullopt};
    }

    if (std::holds_alternative<Sleeping>(current)) {
        if (word == normalize_token(config.wake_word)) return {Listening{now}, std::nullopt};
        return {current, std::nullopt};
    }

    // Listening
    if (word == normalize_token(config.wake_word)) return {Listening{now}, std::nullopt};
    if (word == "left") return {Sleeping{}, ZoomLeft{}};
    if (word == "right") return {Sleeping{}, ZoomRight{}};
    if (word == "out" || word == "both") return {Sleeping{}, ZoomOut{}};
    if (word == "open") return {Sleeping{}, OpenNext{}};
    if (word == "save") return {Dictating{}, std::nullopt};
    return {current, std::nullopt};
}

inline Indicator state_indicator(const VoiceState& state) {
    return std::holds_alternative<Sleeping>(state) ? Indicator::Idle : Indicator::Active;
}

inline std::string_view to_string(Indicator i) { return i == Indicator::Idle ? "idle" : "active"; }

inline std::string_view state_name(const VoiceState& state) {
    if (std::holds_alternative<Sleeping>(state)) return "sleeping";
    if (std::holds_alternative<Listening>(state)) return "listening";
    return "dictating";
}

inline std::string_view action_name(const VoiceAction& action) {
    struct Visitor {
        std::string_view operator()(const ZoomLeft&) const { return "zoom_left"; }
        std::string_view operator()(const ZoomRight&) const { return "zoom_right"; }
        std::string_view operator()(const ZoomOut&) const { return "zoom_out"; }
        std::string_view operator()(const OpenNext&) const { return "open_next"; }
        std::string_view operator()(const SaveSnapshot&) const { return "save_snapshot"; }
    };
    return std::visit(Visitor{}, action);
}

} // namespace ccd::voice
