// SPDX-License-Identifier: Apache-2.0
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "fsmcov/gateway.hpp"

namespace fsmcov {

using nlohmann::json;

std::size_t PromptTranscript::estimated_tokens() const {
    std::size_t chars = 0;
    for (const auto& m : messages) chars += m.content.size();
    return chars / 4; // the usual chars-per-token rule of thumb
}

namespace {

class RemoteBackend final : public Backend {
public:
    explicit RemoteBackend(BackendConfig cfg) : cfg_(std::move(cfg)) {
        if (cfg_.endpoint.empty() || cfg_.model.empty())
            raise("RemoteError", "remote backend needs an endpoint and a model");
        auto scheme_end = cfg_.endpoint.find("://");
        if (scheme_end == std::string::npos)
            raise("RemoteError", "endpoint must include a scheme: " + cfg_.endpoint);
        auto path_start = cfg_.endpoint.find('/', scheme_end + 3);
        if (path_start == std::string::npos) {
            base_ = cfg_.endpoint;
            path_ = "/v1/chat/completions";
        } else {
            base_ = cfg_.endpoint.substr(0, path_start);
            path_ = cfg_.endpoint.substr(path_start);
        }
    }

    std::string id() const override { return "remote:" + cfg_.model; }

    std::string complete(const PromptTranscript& transcript) override {
        json body;
        body["model"] = cfg_.model;
        body["temperature"] = cfg_.temperature;
        body["messages"] = json::array();
        for (const auto& m : transcript.messages)
            body["messages"].push_back(
                {{"role", role_name(m.role)}, {"content", m.content}});

        httplib::Headers headers;
        if (const char* key = std::getenv(cfg_.auth_env.c_str()))
            headers.emplace("Authorization", std::string("Bearer ") + key);

        std::string last_error;
        for (int attempt = 0; attempt <= cfg_.max_retries; ++attempt) {
            if (attempt > 0)
                std::this_thread::sleep_for(
                    std::chrono::milliseconds(250L << (attempt - 1)));
            httplib::Client client(base_);
            client.set_read_timeout(120, 0);
            auto res = client.Post(path_, headers, body.dump(), "application/json");
            if (!res) {
                last_error = "transport failure: " + httplib::to_string(res.error());
                continue;
            }
            if (res->status == 429 || res->status >= 500) {
                last_error = "HTTP " + std::to_string(res->status) + ": " +
                             res->body.substr(0, 200);
                continue;
            }
            if (res->status != 200)
                raise("RemoteError", "HTTP " + std::to_string(res->status) + ": " +
                                         res->body.substr(0, 200));
            try {
                json j = json::parse(res->body);
                return j.at("choices").at(0).at("message").at("content")
                    .get<std::string>();
            } catch (const json::exception& e) {
                raise("RemoteError",
                      std::string("malformed completion response: ") + e.what());
            }
        }
        raise("RemoteError", "retries exhausted; last error: " + last_error);
    }

private:
    BackendConfig cfg_;
    std::string base_, path_;
};

class ReplayBackend final : public Backend {
public:
    explicit ReplayBackend(BackendConfig cfg) : cfg_(std::move(cfg)) {
        std::ifstream in(cfg_.transcript_path);
        if (!in)
            raise("ReplayExhausted",
                  "cannot open transcript tape: " + cfg_.transcript_path);
        std::string text((std::istreambuf_iterator<char>(in)),
                         std::istreambuf_iterator<char>());
        PromptTranscript t = transcript_from_jsonl(text);
        for (const auto& m : t.messages)
            if (m.role == Role::Assistant) tape_.push_back(m.content);
    }

    std::string id() const override { return "replay:" + cfg_.transcript_path; }

    std::string complete(const PromptTranscript&) override {
        if (next_ >= tape_.size())
            raise("ReplayExhausted",
                  "replay tape has no assistant turn " + std::to_string(next_ + 1));
        return tape_[next_++];
    }

private:
    BackendConfig cfg_;
    std::vector<std::string> tape_;
    std::size_t next_ = 0;
};

} // namespace

std::unique_ptr<Backend> make_remote_backend(const BackendConfig& cfg) {
    return std::make_unique<RemoteBackend>(cfg);
}

std::unique_ptr<Backend> make_replay_backend(const BackendConfig& cfg) {
    return std::make_unique<ReplayBackend>(cfg);
}

std::string complete(Backend& backend, PromptTranscript& transcript) {
    transcript.backend_id = backend.id();
    std::string reply = backend.complete(transcript);
    transcript.push({Role::Assistant, reply});
    return reply;
}

std::string transcript_to_jsonl(const PromptTranscript& t) {
    std::ostringstream os;
    for (const auto& m : t.messages) {
        json j{{"role", role_name(m.role)},
               {"content", m.content},
               {"backend", t.backend_id}};
        os << j.dump() << "\n";
    }
    return os.str();
}

PromptTranscript transcript_from_jsonl(const std::string& text) {
    PromptTranscript t;
    std::istringstream is(text);
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        json j = json::parse(line);
        t.push({role_from_name(j.at("role").get<std::string>()),
                j.at("content").get<std::string>()});
        if (j.contains("backend")) t.backend_id = j["backend"].get<std::string>();
    }
    return t;
}

} // namespace fsmcov
