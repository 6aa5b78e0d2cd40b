#pragma once

#include "podrom/errors.hpp"
#include "podrom/linalg.hpp"
#include "podrom/ode.hpp"
#include "podrom/pod.hpp"
#include "podrom/bounds.hpp"
#include "podrom/fhn.hpp"
#include "podrom/experiment.hpp"
#include "podrom/report.hpp"
#include "podrom/config.hpp"
