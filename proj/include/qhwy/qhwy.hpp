#pragma once

#include "qhwy/config_io.hpp"
#include "qhwy/cost_model.hpp"
#include "qhwy/error_analysis.hpp"
#include "qhwy/lstm.hpp"
#include "qhwy/model_io.hpp"
#include "qhwy/quant.hpp"
#include "qhwy/report.hpp"
#include "qhwy/resnet.hpp"
#include "qhwy/rng.hpp"
#include "qhwy/tensor.hpp"
#include "qhwy/version.hpp"
