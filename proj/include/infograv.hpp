#pragma once

// Umbrella header for the whole toolkit.

#include "infograv/distribution.hpp"
#include "infograv/embedding.hpp"
#include "infograv/error.hpp"
#include "infograv/geometry.hpp"
#include "infograv/infomass.hpp"
#include "infograv/landscape.hpp"
#include "infograv/linalg.hpp"
#include "infograv/logprob_dump.hpp"
#include "infograv/metrics.hpp"
#include "infograv/model_io.hpp"
#include "infograv/ngram_model.hpp"
#include "infograv/potential.hpp"
#include "infograv/rng.hpp"
#include "infograv/sampler.hpp"
#include "infograv/token.hpp"
#include "infograv/tokenizer.hpp"
#include "infograv/vocabulary.hpp"
