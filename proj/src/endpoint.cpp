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

#include "anisoeval/endpoint.hpp"

#include <chrono>
#include <cstdlib>

#include <httplib.h>
#include <json.hpp>

#include "anisoeval/errors.hpp"
#include "anisoeval/json_io.hpp"

namespace anisoeval::endpoint {

namespace {

struct ParsedUrl {
  std::string scheme_host_port;  // what httplib::Client takes
  std::string path;
};

ParsedUrl parse_url(const std::string& url) {
  const auto scheme_end = url.find("://");
  require(scheme_end != std::string::npos, "InvalidDescriptor",
          "endpoint URL needs a scheme: '" + url + "'");
  const auto path_start = url.find('/', scheme_end + 3);
  ParsedUrl parsed;
  if (path_start == std::string::npos) {
    parsed.scheme_host_port = url;
    parsed.path = "/";
  } else {
    parsed.scheme_host_port = url.substr(0, path_start);
    parsed.path = url.substr(path_start);
  }
  return parsed;
}

std::string host_of(const std::string& url) {
  const auto scheme_end = url.find("://");
  std::string rest = scheme_end == std::string::npos ? url : url.substr(scheme_end + 3);
  const auto slash = rest.find('/');
  if (slash != std::string::npos) rest = rest.substr(0, slash);
  const auto colon = rest.find(':');
  if (colon != std::string::npos) rest = rest.substr(0, colon);
  return rest;
}

}  // namespace

std::string provider_key(const ModelDescriptor& descriptor) {
  std::string key = descriptor.provider;
  if (key.empty() && descriptor.endpoint) key = host_of(*descriptor.endpoint);
  for (char& c : key) {
    if (c >= 'a' && c <= 'z')
      c -= 32;
    else if (!((c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9')))
      c = '_';
  }
  return key;
}

std::string auth_token(const ModelDescriptor& descriptor) {
  const std::string var = "RELE_API_KEY_" + provider_key(descriptor);
  const char* value = std::getenv(var.c_str());
  return value ? value : "";
}

EndpointRequest build_request(const ModelDescriptor& descriptor, const Sample& sample,
                              int max_tokens) {
  EndpointRequest req;
  req.model = descriptor.id;
  std::string content = sample.prompt;
  if (!sample.constraints.empty()) content += "\n\n" + sample.constraints;
  req.messages.push_back(Message{"user", std::move(content)});
  req.max_tokens = max_tokens;
  req.temperature = 0.0;
  return req;
}

EndpointResponse endpoint_respond(const ModelDescriptor& descriptor, const Sample& sample,
                                  int timeout_ms, int max_tokens) {
  require(descriptor.endpoint.has_value(), "InvalidDescriptor",
          "model '" + descriptor.id + "' has no endpoint");
  const ParsedUrl url = parse_url(*descriptor.endpoint);
  const EndpointRequest req = build_request(descriptor, sample, max_tokens);

  Json body{{"model", req.model},
            {"messages", Json::array()},
            {"max_tokens", req.max_tokens},
            {"temperature", req.temperature}};
  for (const Message& m : req.messages)
    body["messages"].push_back(Json{{"role", m.role}, {"content", m.content}});

  httplib::Client client(url.scheme_host_port);
  client.set_connection_timeout(0, timeout_ms * 1000LL);
  client.set_read_timeout(0, timeout_ms * 1000LL);
  client.set_write_timeout(0, timeout_ms * 1000LL);

  httplib::Headers headers;
  const std::string token = auth_token(descriptor);
  if (!token.empty()) headers.emplace("Authorization", "Bearer " + token);

  const auto start = std::chrono::steady_clock::now();
  const httplib::Result result =
      client.Post(url.path, headers, body.dump(), "application/json");
  const auto elapsed = std::chrono::duration<double, std::milli>(
                           std::chrono::steady_clock::now() - start)
                           .count();

  if (!result) {
    const auto err = result.error();
    if (err == httplib::Error::ConnectionTimeout || err == httplib::Error::Read ||
        err == httplib::Error::Write)
      fail("Timeout", "request to '" + *descriptor.endpoint + "' timed out");
    fail("HttpStatus", "transport error: " + httplib::to_string(err));
  }
  if (result->status != 200)
    fail("HttpStatus", "HTTP " + std::to_string(result->status) + " from '" +
                           *descriptor.endpoint + "'");

  Json parsed = Json::parse(result->body, nullptr, false);
  if (parsed.is_discarded() || !parsed.contains("choices") || parsed["choices"].empty() ||
      !parsed["choices"][0].contains("message") ||
      !parsed["choices"][0]["message"].contains("content"))
    fail("MalformedResponse", "response is not chat-completion shaped");

  EndpointResponse resp;
  resp.content = parsed["choices"][0]["message"]["content"].get<std::string>();
  if (parsed.contains("usage")) {
    resp.prompt_tokens = parsed["usage"].value("prompt_tokens", 0);
    resp.completion_tokens = parsed["usage"].value("completion_tokens", 0);
  }
  resp.end_to_end_latency_ms = elapsed;
  return resp;
}

oracle::Responder make_endpoint_responder(ModelDescriptor descriptor,
                                          EndpointOptions options) {
  descriptor.validate();
  return [descriptor = std::move(descriptor), options](const Sample& sample) {
    const EndpointResponse er =
        endpoint_respond(descriptor, sample, options.timeout_ms, options.max_tokens);
    oracle::Response resp;
    resp.output = er.content;
    resp.latency_ms = er.end_to_end_latency_ms;
    return resp;
  };
}

}  // namespace anisoeval::endpoint
