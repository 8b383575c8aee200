cls  # unused variable (teamform/config.py:69)
cls  # unused variable (teamform/config.py:77)
cls  # unused variable (teamform/config.py:129)
file_secret_settings  # unused variable (teamform/config.py:117)
exc_value  # unused variable (teamform/state/manifest.py:80)
traceback  # unused variable (teamform/state/manifest.py:80)
exc_type  # unused variable (teamform/state/trajectory.py:44)
exc_value  # unused variable (teamform/state/trajectory.py:44)
traceback  # unused variable (teamform/state/trajectory.py:44)
cls  # unused variable (teamform/domain/models.py:27)
cls  # unused variable (teamform/domain/models.py:37)
cls  # unused variable (teamform/domain/models.py:88)
cls  # unused variable (teamform/domain/models.py:212)
