// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "fsmcov/prompts.hpp"

namespace fsmcov {

enum class BackendKind { Remote, Oracle, Replay };

struct BackendConfig {
    BackendKind kind = BackendKind::Oracle;
    // Remote
    std::string endpoint;             // e.g. "https://api.example.com/v1/chat/completions"
    std::string model;
    std::string auth_env = "LLM_API_KEY";
    double temperature = 0.0;
    int max_retries = 3;
    // Replay
    std::string transcript_path;
    // Oracle
    std::uint64_t seed = 0;
};

struct PromptTranscript {
    std::vector<ChatMessage> messages; // one System first, then User/Assistant
    std::string backend_id;

    void push(ChatMessage m) { messages.push_back(std::move(m)); }
    /// Rough size proxy used by the summarized-history fallback.
    std::size_t estimated_tokens() const;
};

class Backend {
public:
    virtual ~Backend() = default;
    virtual std::string id() const = 0;
    /// One completion round trip. Throws DiagError with codes RemoteError /
    /// ReplayExhausted / OracleUnsupportedPrompt.
    virtual std::string complete(const PromptTranscript& transcript) = 0;
};

std::unique_ptr<Backend> make_remote_backend(const BackendConfig& cfg);
/// Tape of recorded assistant turns (JSONL); returns them in order and
/// throws ReplayExhausted past the end.
std::unique_ptr<Backend> make_replay_backend(const BackendConfig& cfg);

/// Appends the pending user/system turns and the assistant reply to the
/// transcript while calling the backend.
std::string complete(Backend& backend, PromptTranscript& transcript);

/// JSONL persistence: {"role","content","backend"} per line.
std::string transcript_to_jsonl(const PromptTranscript& t);
PromptTranscript transcript_from_jsonl(const std::string& text);

} // namespace fsmcov
