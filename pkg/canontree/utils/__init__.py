# Infrastructure: intervals, configuration, errors, output
