#pragma once

#include "dr/backend.hpp"
#include "dr/classifier.hpp"

namespace dr {

// Classifies via an HTTP vision-language endpoint. Request JSON:
// {model, prompt, image_b64 (base64 PNG), max_tokens}; response JSON:
// {text}. Transport failures retry up to params["retries"] extra attempts
// (default 1); an unparseable reply is never retried. The descriptor must
// have role classifier and transport http.
ClassificationOutcome classify_vlm(const ImageBuffer& img,
                                   const backend::BackendDescriptor& desc);

}  // namespace dr
