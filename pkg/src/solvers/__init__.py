"""ROF projection solver, level-set extraction and graph cuts"""
