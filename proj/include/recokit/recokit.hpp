#pragma once

#include "recokit/config.hpp"
#include "recokit/errors.hpp"
#include "recokit/interactions.hpp"
#include "recokit/io.hpp"
#include "recokit/metrics.hpp"
#include "recokit/model.hpp"
#include "recokit/model_io.hpp"
#include "recokit/models/als.hpp"
#include "recokit/models/factory.hpp"
#include "recokit/models/popularity.hpp"
#include "recokit/models/sar.hpp"
#include "recokit/models/sgd_mf.hpp"
#include "recokit/pipeline.hpp"
#include "recokit/rng.hpp"
#include "recokit/splitters.hpp"
#include "recokit/synthetic.hpp"
#include "recokit/tuning.hpp"
#include "recokit/version.hpp"
