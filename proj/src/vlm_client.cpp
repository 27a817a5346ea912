#include "dr/vlm.hpp"

#include "json.hpp"

#include "dr/error.hpp"
#include "dr/image_io.hpp"

using nlohmann::json;

namespace dr {

ClassificationOutcome classify_vlm(const ImageBuffer& img,
                                   const backend::BackendDescriptor& desc) {
  if (desc.role != backend::Role::Classifier) {
    throw Error(ErrorKind::ConfigError,
                "backend '" + desc.name + "' is not a classifier");
  }
  if (desc.transport != backend::Transport::Http) {
    throw Error(ErrorKind::ConfigError,
                "classifier backend '" + desc.name + "' must use http");
  }

  json body;
  {
    const auto it = desc.params.find("model");
    body["model"] = it == desc.params.end() ? "default" : it->second;
  }
  body["prompt"] = build_vlm_prompt();
  body["image_b64"] = backend::base64_encode(io::encode_png(img));
  body["max_tokens"] = desc.param_int("max_tokens", 16);

  const int retries = desc.param_int("retries", 1);
  std::string reply;
  for (int attempt = 0;; ++attempt) {
    try {
      reply = backend::http_exchange(desc, body.dump(), "application/json");
      break;
    } catch (const Error& e) {
      const bool transport = e.kind() == ErrorKind::BackendUnavailable ||
                             e.kind() == ErrorKind::BackendTimeout;
      if (!transport || attempt >= retries) throw;
    }
  }

  std::string text;
  try {
    text = json::parse(reply).at("text").get<std::string>();
  } catch (const json::exception&) {
    throw Error(ErrorKind::BackendProtocolError,
                "classifier reply is not {\"text\": ...} JSON");
  }

  ClassificationOutcome out;
  out.category = parse_vlm_response(text);
  out.source = ClassifierSource::Vlm;
  out.confidence = 1.0;
  out.raw_response = text;
  return out;
}

}  // namespace dr
