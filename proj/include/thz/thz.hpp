// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "thz/channel_model.hpp"
#include "thz/config.hpp"
#include "thz/config_file.hpp"
#include "thz/dataset_io.hpp"
#include "thz/error.hpp"
#include "thz/estimators.hpp"
#include "thz/experiment.hpp"
#include "thz/impairments.hpp"
#include "thz/metrics.hpp"
#include "thz/nn/adam.hpp"
#include "thz/nn/checkpoint.hpp"
#include "thz/nn/model.hpp"
#include "thz/nn/train.hpp"
#include "thz/observation.hpp"
