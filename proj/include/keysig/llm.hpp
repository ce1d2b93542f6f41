// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <atomic>
#include <memory>
#include <string>

namespace keysig {

struct EndpointConfig {
    std::string base_url;                       // e.g. http://localhost:8080
    std::string path = "/v1/chat/completions";
    std::string model = "gpt-4o-mini";
    std::string api_key_env = "KEYSIG_API_KEY"; // credential comes from the environment only
    std::string mock_dir;                       // non-empty switches to scripted responses
    int transport_retries = 2;                  // retries for transport faults, separate from
                                                // generation attempts
    long token_budget = 0;                      // max input tokens per run, 0 = unlimited
};

struct LlmResponse {
    std::string text;
    long input_tokens = 0;
    long output_tokens = 0;
};

/// Shared run-level token accounting. try_charge throws BudgetExceeded
/// before a request whose estimate would blow the budget.
class TokenTally {
public:
    explicit TokenTally(long budget) : budget_(budget) {}

    void try_charge(long input_estimate) const;
    void add(long input_tokens, long output_tokens);

    long input_total() const { return input_; }
    long output_total() const { return output_; }

private:
    long budget_;
    std::atomic<long> input_{0};
    std::atomic<long> output_{0};
};

class LlmClient {
public:
    virtual ~LlmClient() = default;
    /// signal/attempt identify the request for scripted mocks; HTTP
    /// transport ignores them.
    virtual LlmResponse request(const std::string& signal, int attempt, const std::string& prompt) = 0;
};

/// POST to a chat-completions style JSON endpoint. 401/403 raise
/// AuthError, other failures TransportError.
std::unique_ptr<LlmClient> make_http_client(const EndpointConfig& cfg);

/// Reads canned responses from cfg.mock_dir, never touching the network.
/// Lookup order for signal S and attempt N:
///   <sanitized S>.<N>.txt, default.<N>.txt, default.txt
std::unique_ptr<LlmClient> make_mock_client(const EndpointConfig& cfg);

/// mock_dir decides which transport is constructed.
std::unique_ptr<LlmClient> make_client(const EndpointConfig& cfg);

} // namespace keysig
