#pragma once

#define ADLM_VERSION "0.1.0"
