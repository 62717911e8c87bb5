#pragma once

#include "vesselcast/ais.hpp"
#include "vesselcast/baselines.hpp"
#include "vesselcast/checkpoint.hpp"
#include "vesselcast/common.hpp"
#include "vesselcast/dataset_io.hpp"
#include "vesselcast/geo.hpp"
#include "vesselcast/hermite.hpp"
#include "vesselcast/layers.hpp"
#include "vesselcast/metrics.hpp"
#include "vesselcast/model.hpp"
#include "vesselcast/optim.hpp"
#include "vesselcast/parallel.hpp"
#include "vesselcast/pipeline.hpp"
#include "vesselcast/risk.hpp"
#include "vesselcast/scaler.hpp"
#include "vesselcast/scene.hpp"
#include "vesselcast/synth.hpp"
#include "vesselcast/tensor.hpp"
#include "vesselcast/train.hpp"
#include "vesselcast/trajectory.hpp"
#include "vesselcast/windowing.hpp"
