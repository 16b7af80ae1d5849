// Copyright 2026 The AnisoEval Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Wire-protocol client for OpenAI-style chat-completion endpoints. One
// request per sample, temperature 0, end-to-end latency measured from
// request transmission to receipt of the full response.

#include <cstdint>
#include <string>
#include <vector>

#include "anisoeval/oracle.hpp"
#include "anisoeval/types.hpp"

namespace anisoeval::endpoint {

struct Message {
  std::string role;
  std::string content;
};

struct EndpointRequest {
  std::string model;
  std::vector<Message> messages;
  int max_tokens = 1024;
  double temperature = 0.0;
};

struct EndpointResponse {
  std::string content;
  std::int64_t prompt_tokens = 0;
  std::int64_t completion_tokens = 0;
  double end_to_end_latency_ms = 0.0;
};

struct EndpointOptions {
  int timeout_ms = 30000;
  int max_tokens = 1024;
};

/// Provider key for the auth env var RELE_API_KEY_<PROVIDER>: the explicit
/// descriptor provider if set, else the endpoint host uppercased with
/// non-alphanumerics mapped to '_'.
std::string provider_key(const ModelDescriptor& descriptor);

/// Reads the bearer token from the environment; empty when unset.
std::string auth_token(const ModelDescriptor& descriptor);

EndpointRequest build_request(const ModelDescriptor& descriptor, const Sample& sample,
                              int max_tokens);

/// Sends one chat-completion request. descriptor.endpoint must be the full
/// URL of the chat-completions resource. Throws Error with code Timeout,
/// HttpStatus or MalformedResponse; the scheduler surfaces those as
/// responder failures.
EndpointResponse endpoint_respond(const ModelDescriptor& descriptor, const Sample& sample,
                                  int timeout_ms, int max_tokens = 1024);

/// Adapts the client to the scheduler's responder interface.
oracle::Responder make_endpoint_responder(ModelDescriptor descriptor,
                                          EndpointOptions options = {});

}  // namespace anisoeval::endpoint
