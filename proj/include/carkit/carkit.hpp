#pragma once

#include "carkit/array.hpp"
#include "carkit/decode.hpp"
#include "carkit/encode.hpp"
#include "carkit/error.hpp"
#include "carkit/loss.hpp"
#include "carkit/metrics.hpp"
#include "carkit/npy.hpp"
#include "carkit/numfmt.hpp"
#include "carkit/pgm.hpp"
#include "carkit/rng.hpp"
#include "carkit/synth.hpp"
#include "carkit/table.hpp"
#include "carkit/types.hpp"
#include "carkit/uncertainty.hpp"
