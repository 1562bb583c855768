#pragma once

#include "i2s/core/geometry.hpp"
#include "i2s/core/image.hpp"
#include "i2s/core/random.hpp"
#include "i2s/executor/executor.hpp"
#include "i2s/executor/log.hpp"
#include "i2s/executor/run_config.hpp"
#include "i2s/experiments/experiment.hpp"
#include "i2s/flow/lucas_kanade.hpp"
#include "i2s/flow/photometric.hpp"
#include "i2s/foresight/codec.hpp"
#include "i2s/foresight/foresight.hpp"
#include "i2s/foresight/remote.hpp"
#include "i2s/ibvs/interaction.hpp"
#include "i2s/ibvs/motion_depth.hpp"
#include "i2s/ibvs/solver.hpp"
#include "i2s/sim/scenario.hpp"
#include "i2s/sim/scenario_json.hpp"
#include "i2s/sim/scene.hpp"
#include "i2s/sim/texture.hpp"
